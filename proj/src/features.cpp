#include "uwb/features.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "uwb/errors.hpp"
#include "uwb/textio.hpp"

namespace uwb {

namespace {

// Trapezoidal weights: half at the record ends, full inside.
double trapezoid(const std::vector<double>& y, double dt) {
  double acc = 0.5 * (y.front() + y.back());
  for (std::size_t k = 1; k + 1 < y.size(); ++k) acc += y[k];
  return acc * dt;
}

}  // namespace

FeatureVector extract_features(const Waveform& w, double toa_s) {
  validate(w);
  if (w.samples.size() < 2)
    throw DomainError("extract_features: record too short");
  if (!(toa_s >= w.t_start && toa_s <= w.t_end()))
    throw DomainError("extract_features: TOA outside the record");

  const std::size_t n = w.samples.size();
  const double dt = w.sample_period();
  std::vector<double> mag(n), t(n);
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mag[k] = std::fabs(w.samples[k]);
    t[k] = w.time_of(k) - toa_s;
    peak = std::max(peak, mag[k]);
  }
  if (peak == 0.0) throw NoSignalError("extract_features: all-zero record");

  std::vector<double> work(n);
  for (std::size_t k = 0; k < n; ++k) work[k] = mag[k] * mag[k];
  const double energy = trapezoid(work, dt);
  if (!(energy > 0.0)) throw NoSignalError("extract_features: zero energy");

  for (std::size_t k = 0; k < n; ++k) work[k] = t[k] * mag[k] * mag[k];
  const double med = trapezoid(work, dt) / energy;

  for (std::size_t k = 0; k < n; ++k)
    work[k] = (t[k] - med) * (t[k] - med) * mag[k] * mag[k];
  const double spread = trapezoid(work, dt) / energy;

  // First crossings of 0.1 and 0.9 of the peak magnitude.
  double t10 = t.back(), t90 = t.back();
  for (std::size_t k = 0; k < n; ++k) {
    if (mag[k] > 0.1 * peak) {
      t10 = t[k];
      break;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (mag[k] > 0.9 * peak) {
      t90 = t[k];
      break;
    }
  }

  const double window = t.back() - t.front();
  const double mean_mag = trapezoid(mag, dt) / window;
  for (std::size_t k = 0; k < n; ++k)
    work[k] = (mag[k] - mean_mag) * (mag[k] - mean_mag);
  const double var_mag = trapezoid(work, dt) / window;
  if (!(var_mag > 0.0))
    throw DataError("extract_features: constant magnitude, kurtosis undefined");
  for (std::size_t k = 0; k < n; ++k) work[k] = work[k] * work[k];
  const double kurt = trapezoid(work, dt) / (var_mag * var_mag * window);

  FeatureVector f;
  f.peak_amplitude = peak;
  f.mean_excess_delay = med;
  f.delay_spread = spread;
  f.energy = energy;
  f.rise_time = t90 - t10;
  f.kurtosis = kurt;
  return f;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0))
    throw FitError("fit_di_model: all link distances equal, line fit is rank deficient");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace

DIModelParams fit_di_model(const std::vector<LinkObservation>& obs) {
  if (obs.size() < 2)
    throw DataError("fit_di_model: need at least two observations");
  std::vector<double> d(obs.size()), peak(obs.size()), spread(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const FeatureVector f = extract_features(obs[k].waveform, obs[k].toa_est);
    d[k] = obs[k].true_distance;
    peak[k] = f.peak_amplitude;
    spread[k] = f.delay_spread;
  }
  DIModelParams p;
  p.peak_slope = -fit_line(d, peak).slope;
  p.delay_spread_floor = fit_line(d, spread).intercept;
  return p;
}

DIFeatureVector to_distance_independent(const FeatureVector& x, double distance_m,
                                        const DIModelParams& p) {
  if (!(distance_m > 0.0))
    throw DomainError("to_distance_independent: distance must be positive");
  DIFeatureVector y;
  y.peak_at_origin = x.peak_amplitude + p.peak_slope * distance_m;
  y.excess_delay_per_m = x.mean_excess_delay / distance_m;
  y.delay_spread_per_m = (x.delay_spread - p.delay_spread_floor) / distance_m;
  return y;
}

std::array<double, 3> invert_distance_independent(const DIFeatureVector& x,
                                                  double distance_m,
                                                  const DIModelParams& p) {
  if (!(distance_m > 0.0))
    throw DomainError("invert_distance_independent: distance must be positive");
  return {x.peak_at_origin - p.peak_slope * distance_m,
          x.excess_delay_per_m * distance_m,
          x.delay_spread_per_m * distance_m + p.delay_spread_floor};
}

const std::array<const char*, CorrelationReport::kColumns>
    CorrelationReport::kColumnNames = {
        "peak_amplitude", "mean_excess_delay", "delay_spread",
        "energy",         "rise_time",         "kurtosis",
        "distance",       "peak_at_origin",    "excess_delay_per_m",
        "delay_spread_per_m"};

namespace {

double abs_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    return std::numeric_limits<double>::quiet_NaN();
  return std::min(1.0, std::fabs(sxy) / std::sqrt(sxx * syy));
}

}  // namespace

CorrelationReport correlation_report(const std::vector<LinkObservation>& obs,
                                     const DIModelParams& p) {
  // Column-major sample table per state: 10 quantities + the bias.
  std::array<std::vector<double>, CorrelationReport::kColumns> cols_los, cols_nlos;
  std::vector<double> bias_los, bias_nlos;
  for (const LinkObservation& o : obs) {
    const FeatureVector f = extract_features(o.waveform, o.toa_est);
    const DIFeatureVector g = to_distance_independent(f, o.true_distance, p);
    const std::array<double, CorrelationReport::kColumns> row = {
        f.peak_amplitude, f.mean_excess_delay, f.delay_spread,
        f.energy,         f.rise_time,         f.kurtosis,
        o.true_distance,  g.peak_at_origin,    g.excess_delay_per_m,
        g.delay_spread_per_m};
    auto& cols = o.state == ChannelState::kLos ? cols_los : cols_nlos;
    auto& bias = o.state == ChannelState::kLos ? bias_los : bias_nlos;
    for (int c = 0; c < CorrelationReport::kColumns; ++c)
      cols[c].push_back(row[c]);
    bias.push_back(o.true_bias);
  }
  if (bias_los.size() < 3 || bias_nlos.size() < 3)
    throw DataError("correlation_report: need at least 3 observations per state");

  CorrelationReport r;
  r.n_los = static_cast<int>(bias_los.size());
  r.n_nlos = static_cast<int>(bias_nlos.size());
  for (int c = 0; c < CorrelationReport::kColumns; ++c) {
    r.los[c] = abs_pearson(bias_los, cols_los[c]);
    r.nlos[c] = abs_pearson(bias_nlos, cols_nlos[c]);
  }
  return r;
}

void write_correlation_report(const CorrelationReport& r, std::ostream& out) {
  auto cell = [](double v) {
    return std::isnan(v) ? std::string("n/a") : format_double(v);
  };
  auto block = [&](int from, int to) {
    out << "state";
    for (int c = from; c < to; ++c)
      out << '\t' << CorrelationReport::kColumnNames[c];
    out << '\n';
    out << "NLOS";
    for (int c = from; c < to; ++c) out << '\t' << cell(r.nlos[c]);
    out << '\n';
    out << "LOS";
    for (int c = from; c < to; ++c) out << '\t' << cell(r.los[c]);
    out << '\n';
  };
  out << "# |corr(bias, .)| per channel state; n_nlos=" << r.n_nlos
      << " n_los=" << r.n_los << '\n';
  block(0, 7);
  out << '\n';
  block(7, CorrelationReport::kColumns);
}

}  // namespace uwb
