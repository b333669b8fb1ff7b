#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "uwb/errors.hpp"
#include "uwb/features.hpp"
#include "uwb/rng.hpp"
#include "uwb/synth.hpp"

using namespace uwb;

namespace {

// Independent oracle: the defining sums written out directly, one pass per
// quantity, trapezoidal weights spelled out by hand.
struct OracleFeatures {
  double peak, med, spread, energy, rise, kurt;
};

OracleFeatures oracle(const Waveform& w, double toa) {
  const std::size_t n = w.samples.size();
  const double dt = 1.0 / w.sample_rate;
  auto weight = [&](std::size_t k) {
    return (k == 0 || k == n - 1) ? 0.5 * dt : dt;
  };
  auto t_of = [&](std::size_t k) { return w.t_start + k * dt - toa; };
  auto mag = [&](std::size_t k) { return std::fabs(w.samples[k]); };

  OracleFeatures o{};
  for (std::size_t k = 0; k < n; ++k) o.peak = std::max(o.peak, mag(k));
  for (std::size_t k = 0; k < n; ++k) o.energy += weight(k) * mag(k) * mag(k);
  for (std::size_t k = 0; k < n; ++k)
    o.med += weight(k) * t_of(k) * mag(k) * mag(k);
  o.med /= o.energy;
  for (std::size_t k = 0; k < n; ++k)
    o.spread += weight(k) * (t_of(k) - o.med) * (t_of(k) - o.med) * mag(k) * mag(k);
  o.spread /= o.energy;

  double t10 = t_of(n - 1), t90 = t_of(n - 1);
  for (std::size_t k = 0; k < n; ++k)
    if (mag(k) > 0.1 * o.peak) {
      t10 = t_of(k);
      break;
    }
  for (std::size_t k = 0; k < n; ++k)
    if (mag(k) > 0.9 * o.peak) {
      t90 = t_of(k);
      break;
    }
  o.rise = t90 - t10;

  const double window = (n - 1) * dt;
  double mu = 0.0;
  for (std::size_t k = 0; k < n; ++k) mu += weight(k) * mag(k);
  mu /= window;
  double var = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    var += weight(k) * (mag(k) - mu) * (mag(k) - mu);
  var /= window;
  double fourth = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    fourth += weight(k) * std::pow(mag(k) - mu, 4.0);
  o.kurt = fourth / (var * var * window);
  return o;
}

Waveform record_of(std::vector<double> samples, double fs, double t_start = 0.0) {
  Waveform w;
  w.samples = std::move(samples);
  w.sample_rate = fs;
  w.t_start = t_start;
  return w;
}

}  // namespace

TEST_CASE("features match the direct-summation oracle on random records") {
  Rng rng = make_stream(21, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 63);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(64);
    for (double& v : s) v = u(rng);
    const Waveform w = record_of(std::move(s), 2e9, u(rng) * 1e-9);
    const double toa = w.time_of(pick(rng));
    const FeatureVector f = extract_features(w, toa);
    const OracleFeatures o = oracle(w, toa);
    CHECK(f.peak_amplitude == doctest::Approx(o.peak).epsilon(1e-9));
    CHECK(f.mean_excess_delay == doctest::Approx(o.med).epsilon(1e-9));
    CHECK(f.delay_spread == doctest::Approx(o.spread).epsilon(1e-9));
    CHECK(f.energy == doctest::Approx(o.energy).epsilon(1e-9));
    CHECK(f.rise_time == doctest::Approx(o.rise).epsilon(1e-9));
    CHECK(f.kurtosis == doctest::Approx(o.kurt).epsilon(1e-9));
  }
}

TEST_CASE("single impulse at the TOA is a point mass") {
  std::vector<double> s(32, 0.0);
  s[4] = 1.0;
  const Waveform w = record_of(s, 1e9);
  const FeatureVector f = extract_features(w, w.time_of(4));
  CHECK(f.peak_amplitude == 1.0);
  CHECK(f.mean_excess_delay == 0.0);
  CHECK(f.delay_spread == 0.0);
}

TEST_CASE("two equal impulses: symmetric two-point distribution") {
  std::vector<double> s(32, 0.0);
  s[4] = 1.0;
  s[6] = 1.0;  // 2 ns later at 1 GHz
  const Waveform w = record_of(s, 1e9);
  const FeatureVector f = extract_features(w, w.time_of(4));
  CHECK(f.mean_excess_delay == doctest::Approx(1e-9).epsilon(1e-12));
  CHECK(f.delay_spread == doctest::Approx(1e-18).epsilon(1e-12));
}

TEST_CASE("rise time of a linear ramp") {
  // |r| climbs 0 to 1 over 1 ns, then stays; 0.1/0.9 crossings sit 0.8 ns apart.
  const double fs = 100e9;
  std::vector<double> s;
  for (int k = 0; k <= 100; ++k) s.push_back(k / 100.0);
  for (int k = 0; k < 40; ++k) s.push_back(1.0);
  const Waveform w = record_of(std::move(s), fs);
  const FeatureVector f = extract_features(w, 0.0);
  CHECK(std::fabs(f.rise_time - 0.8e-9) <= 1.0 / fs + 1e-15);
}

TEST_CASE("amplitude scaling moves only peak and energy") {
  Rng rng = make_stream(22, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> s(48);
  for (double& v : s) v = u(rng);
  const Waveform w = record_of(s, 1e9);
  const double alpha = 3.25;
  Waveform scaled = w;
  for (double& v : scaled.samples) v *= alpha;

  const FeatureVector a = extract_features(w, w.time_of(3));
  const FeatureVector b = extract_features(scaled, w.time_of(3));
  CHECK(b.peak_amplitude == doctest::Approx(alpha * a.peak_amplitude).epsilon(1e-12));
  CHECK(b.energy == doctest::Approx(alpha * alpha * a.energy).epsilon(1e-12));
  CHECK(b.mean_excess_delay == doctest::Approx(a.mean_excess_delay).epsilon(1e-12));
  CHECK(b.delay_spread == doctest::Approx(a.delay_spread).epsilon(1e-12));
  CHECK(b.rise_time == doctest::Approx(a.rise_time).epsilon(1e-12));
  CHECK(b.kurtosis == doctest::Approx(a.kurtosis).epsilon(1e-12));
}

TEST_CASE("shifting record and TOA together changes nothing") {
  Rng rng = make_stream(23, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> s(48);
  for (double& v : s) v = u(rng);
  Waveform w = record_of(s, 1e9);
  const FeatureVector a = extract_features(w, w.time_of(5));
  Waveform shifted = w;
  shifted.t_start += 7.25e-9;
  const FeatureVector b = extract_features(shifted, shifted.time_of(5));
  CHECK(b.mean_excess_delay == doctest::Approx(a.mean_excess_delay).epsilon(1e-9));
  CHECK(b.delay_spread == doctest::Approx(a.delay_spread).epsilon(1e-9));
  CHECK(b.rise_time == doctest::Approx(a.rise_time).epsilon(1e-9));
  CHECK(b.kurtosis == doctest::Approx(a.kurtosis).epsilon(1e-9));
}

TEST_CASE("extract_features error paths") {
  std::vector<double> zeros(16, 0.0);
  const Waveform w = record_of(zeros, 1e9);
  CHECK_THROWS_AS(extract_features(w, 0.0), NoSignalError);

  std::vector<double> flat(16, 0.7);
  const Waveform c = record_of(flat, 1e9);
  CHECK_THROWS_AS(extract_features(c, 0.0), DataError);

  std::vector<double> ok(16, 0.0);
  ok[3] = 1.0;
  const Waveform g = record_of(ok, 1e9);
  CHECK_THROWS_AS(extract_features(g, -5e-9), DomainError);
  CHECK_THROWS_AS(extract_features(g, 1.0), DomainError);
}

namespace {

// Observation whose record is a pair of impulses: exact peak and exact
// delay spread (half separation squared) by construction.
LinkObservation two_impulse_obs(double d, double amp, int separation_samples,
                                ChannelState state = ChannelState::kLos,
                                double bias = 0.0) {
  LinkObservation o;
  o.true_distance = d;
  o.state = state;
  o.true_bias = bias;
  o.toa_est = 0.0;
  o.waveform.sample_rate = 1e10;
  o.waveform.samples.assign(80 + separation_samples, 0.0);
  o.waveform.samples[2] = amp;
  o.waveform.samples[2 + separation_samples] = amp;
  return o;
}

}  // namespace

TEST_CASE("fit_di_model recovers exact linear trends") {
  // peak = 5 - 0.5 d via impulse amplitudes
  std::vector<LinkObservation> obs;
  for (double d : {1.0, 2.0, 3.0, 4.0})
    obs.push_back(two_impulse_obs(d, 5.0 - 0.5 * d, 10));
  DIModelParams p = fit_di_model(obs);
  CHECK(p.peak_slope == doctest::Approx(0.5).epsilon(1e-12));

  // delay spread = 2 ns^2 + 0.3 ns^2/m * d via impulse separations:
  // separation 2s gives spread s^2, so choose d = (s^2 - 2ns^2) / 0.3ns^2.
  obs.clear();
  const double dt = 1e-10;
  for (int m : {30, 40, 50, 60}) {
    const double s = 0.5 * m * dt;
    const double d = (s * s - 2e-18) / 0.3e-18;
    obs.push_back(two_impulse_obs(d, 1.0, m));
  }
  p = fit_di_model(obs);
  CHECK(p.delay_spread_floor == doctest::Approx(2e-18).epsilon(1e-9));
}

TEST_CASE("fit_di_model recovers noisy trends within three standard errors") {
  Rng rng = make_stream(24, 0);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> dist(1.0, 5.0);
  std::vector<LinkObservation> obs;
  std::vector<double> xs, ys;
  for (int i = 0; i < 200; ++i) {
    const double d = dist(rng);
    const double peak = 5.0 - 0.5 * d + noise(rng);
    obs.push_back(two_impulse_obs(d, peak, 10));
    xs.push_back(d);
    ys.push_back(peak);
  }
  const DIModelParams p = fit_di_model(obs);

  // Standard error of the slope from the residuals.
  double mx = 0.0;
  for (double x : xs) mx += x;
  mx /= xs.size();
  double sxx = 0.0;
  for (double x : xs) sxx += (x - mx) * (x - mx);
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = (5.0 - 0.5 * xs[i]);
    ss += (ys[i] - pred) * (ys[i] - pred);
  }
  const double se = std::sqrt(ss / (xs.size() - 2) / sxx);
  CHECK(std::fabs(p.peak_slope - 0.5) < 3.0 * se);
}

TEST_CASE("fit_di_model needs distinct distances") {
  std::vector<LinkObservation> obs;
  for (int i = 0; i < 4; ++i) obs.push_back(two_impulse_obs(2.0, 1.0, 10));
  CHECK_THROWS_AS(fit_di_model(obs), FitError);
}

TEST_CASE("distance-independent transform arithmetic and inverse") {
  DIModelParams p;
  p.peak_slope = 0.5;
  p.delay_spread_floor = 0.0;
  FeatureVector f{};
  f.peak_amplitude = 1.0;
  f.mean_excess_delay = 6e-9;
  f.delay_spread = 3e-18;

  SUBCASE("forward values") {
    const DIFeatureVector g = to_distance_independent(f, 2.0, p);
    CHECK(g.peak_at_origin == doctest::Approx(2.0).epsilon(1e-12));
    const DIFeatureVector h = to_distance_independent(f, 3.0, p);
    CHECK(h.excess_delay_per_m == doctest::Approx(2e-9).epsilon(1e-12));
  }

  SUBCASE("round trip") {
    p.delay_spread_floor = 1.5e-18;
    const DIFeatureVector g = to_distance_independent(f, 2.7, p);
    const auto back = invert_distance_independent(g, 2.7, p);
    CHECK(back[0] == doctest::Approx(f.peak_amplitude).epsilon(1e-12));
    CHECK(back[1] == doctest::Approx(f.mean_excess_delay).epsilon(1e-12));
    CHECK(back[2] == doctest::Approx(f.delay_spread).epsilon(1e-12));
  }

  SUBCASE("bad distance") {
    CHECK_THROWS_AS(to_distance_independent(f, 0.0, p), DomainError);
    CHECK_THROWS_AS(to_distance_independent(f, -2.0, p), DomainError);
  }
}

TEST_CASE("correlation report flags exact and absent dependence") {
  Rng rng = make_stream(25, 0);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<LinkObservation> obs;

  // NLOS: impulse amplitude exactly linear in the bias; LOS: constant bias 0.
  const int kN = 10000;
  for (int i = 0; i < kN; ++i) {
    const double bias = 1e-9 * u(rng);
    LinkObservation o = two_impulse_obs(2.0 + 0.001 * i, 1.0 + 1e9 * bias, 10,
                                        ChannelState::kNlos, bias);
    obs.push_back(std::move(o));
  }
  for (int i = 0; i < 100; ++i)
    obs.push_back(two_impulse_obs(1.0 + 0.01 * i, u(rng), 10));

  DIModelParams p;
  const CorrelationReport rep = correlation_report(obs, p);

  // peak_amplitude is column 0; exactly linear in bias under NLOS.
  CHECK(rep.nlos[0] == doctest::Approx(1.0).epsilon(1e-9));
  // independent column: peak under LOS had random amplitude, but LOS bias is
  // identically zero, so every LOS cell is undefined.
  for (int c = 0; c < CorrelationReport::kColumns; ++c)
    CHECK(std::isnan(rep.los[c]));
  // distance was an arithmetic ramp, independent of the bias draw.
  CHECK(rep.nlos[6] < 0.05);
  CHECK(rep.n_nlos == kN);

  std::ostringstream ss;
  write_correlation_report(rep, ss);
  CHECK(ss.str().find("NLOS\t") != std::string::npos);
  CHECK(ss.str().find("n/a") != std::string::npos);
}

TEST_CASE("a bit-identical feature column is marked undefined") {
  // Same record on every NLOS link: every feature column has zero variance.
  std::vector<LinkObservation> obs;
  for (int i = 0; i < 8; ++i) {
    LinkObservation o = two_impulse_obs(2.0, 1.0, 10, ChannelState::kNlos,
                                        (1.0 + 0.1 * i) * 1e-9);
    obs.push_back(std::move(o));
  }
  for (int i = 0; i < 3; ++i) obs.push_back(two_impulse_obs(1.0 + i, 1.0, 10));
  DIModelParams p;
  const CorrelationReport rep = correlation_report(obs, p);
  CHECK(std::isnan(rep.nlos[0]));  // constant peak
  CHECK(std::isnan(rep.nlos[2]));  // constant delay spread
  CHECK(std::isnan(rep.nlos[6]));  // constant distance
}

TEST_CASE("correlation report needs three observations per state") {
  std::vector<LinkObservation> obs;
  obs.push_back(two_impulse_obs(1.0, 1.0, 10));
  obs.push_back(two_impulse_obs(2.0, 1.0, 10));
  obs.push_back(
      two_impulse_obs(3.0, 1.0, 10, ChannelState::kNlos, 1e-9));
  DIModelParams p;
  CHECK_THROWS_AS(correlation_report(obs, p), DataError);
}
