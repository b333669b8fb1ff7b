#include "uwb/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uwb/errors.hpp"

namespace uwb {

namespace {

constexpr double kDensityFloor = 1e-30;
constexpr double kMinTrialDistance = 1e-9;  // m, vertex-on-anchor guard

}  // namespace

GridSpec GridSpec::covering(std::span<const Anchor> anchors, double margin,
                            double step) {
  if (anchors.empty()) throw ConfigError("grid: no anchors to cover");
  GridSpec g;
  g.step = step;
  g.x_lo = anchors[0].x;
  g.x_hi = anchors[0].x;
  g.y_lo = anchors[0].y;
  g.y_hi = anchors[0].y;
  for (const Anchor& a : anchors) {
    g.x_lo = std::min(g.x_lo, a.x);
    g.x_hi = std::max(g.x_hi, a.x);
    g.y_lo = std::min(g.y_lo, a.y);
    g.y_hi = std::max(g.y_hi, a.y);
  }
  // Square box with the requested margin.
  const double cx = 0.5 * (g.x_lo + g.x_hi), cy = 0.5 * (g.y_lo + g.y_hi);
  const double half =
      0.5 * std::max(g.x_hi - g.x_lo, g.y_hi - g.y_lo) + margin;
  g.x_lo = cx - half;
  g.x_hi = cx + half;
  g.y_lo = cy - half;
  g.y_hi = cy + half;
  validate(g);
  return g;
}

int GridSpec::nx() const {
  return static_cast<int>(std::floor((x_hi - x_lo) / step + 1e-9)) + 1;
}

int GridSpec::ny() const {
  return static_cast<int>(std::floor((y_hi - y_lo) / step + 1e-9)) + 1;
}

void validate(const GridSpec& g) {
  if (!(g.step > 0.0)) throw ConfigError("grid: step must be positive");
  if (!(g.x_hi > g.x_lo) || !(g.y_hi > g.y_lo))
    throw ConfigError("grid: empty box");
  if (g.nx() < 2 || g.ny() < 2)
    throw ConfigError("grid: box holds fewer than 4 vertices");
}

PositionEstimate ls_estimate(std::span<const LinkInput> links,
                             const GridSpec& grid) {
  validate(grid);
  if (links.empty()) throw DataError("ls_estimate: no links");

  std::vector<double> ranges(links.size());
  for (std::size_t i = 0; i < links.size(); ++i)
    ranges[i] = kSpeedOfLight * links[i].toa;

  PositionEstimate best;
  best.ambiguous = links.size() < 3;
  double best_obj = std::numeric_limits<double>::infinity();
  const int nx = grid.nx(), ny = grid.ny();
  for (int i = 0; i < nx; ++i) {
    const double x = grid.x(i);
    for (int j = 0; j < ny; ++j) {
      const double y = grid.y(j);
      double obj = 0.0;
      for (std::size_t l = 0; l < links.size(); ++l) {
        const double dx = x - links[l].anchor.x;
        const double dy = y - links[l].anchor.y;
        const double r = ranges[l] - std::sqrt(dx * dx + dy * dy);
        obj += r * r;
      }
      if (obj < best_obj) {
        best_obj = obj;
        best.x = x;
        best.y = y;
      }
    }
  }
  best.objective = best_obj;
  return best;
}

namespace {

// Joint evaluation point for one link at one trial position.
// Returns false when the point cannot be formed (anchor-coincident vertex
// in the distance-independent parameterization).
inline bool fill_point(const LinkInput& link, double x, double y,
                       Parameterization param, const DIModelParams* di,
                       int joint_dims, double* pt) {
  const double dx = x - link.anchor.x;
  const double dy = y - link.anchor.y;
  const double d = std::sqrt(dx * dx + dy * dy);
  pt[0] = link.toa - d / kSpeedOfLight;
  const FeatureVector& f = link.features;
  if (param == Parameterization::kDistanceDependent) {
    if (joint_dims == 2) {
      pt[1] = f.delay_spread;
    } else {
      pt[1] = f.peak_amplitude;
      pt[2] = f.mean_excess_delay;
      pt[3] = f.delay_spread;
    }
    return true;
  }
  if (d < kMinTrialDistance) return false;
  if (joint_dims == 2) {
    pt[1] = (f.delay_spread - di->delay_spread_floor) / d;
  } else {
    pt[1] = f.peak_amplitude + di->peak_slope * d;
    pt[2] = f.mean_excess_delay / d;
    pt[3] = (f.delay_spread - di->delay_spread_floor) / d;
  }
  return true;
}

}  // namespace

PositionEstimate ml_estimate(std::span<const LinkInput> links,
                             const Density& joint, int joint_dims,
                             Parameterization param, const DIModelParams* di,
                             const GridSpec& grid) {
  validate(grid);
  if (links.empty()) throw DataError("ml_estimate: no links");
  if (joint_dims != 2 && joint_dims != 4)
    throw ConfigError("ml_estimate: joint_dims must be 2 or 4");
  if (joint.dims() != joint_dims)
    throw ConfigError("ml_estimate: density rank does not match the mode");
  if (param == Parameterization::kDistanceIndependent && di == nullptr)
    throw ConfigError("ml_estimate: distance-independent mode needs DI params");

  PositionEstimate best;
  best.ambiguous = links.size() < 3;
  double best_obj = -std::numeric_limits<double>::infinity();
  const double log_floor = std::log(kDensityFloor);
  const int nx = grid.nx(), ny = grid.ny();
  double pt[4];
  for (int i = 0; i < nx; ++i) {
    const double x = grid.x(i);
    for (int j = 0; j < ny; ++j) {
      const double y = grid.y(j);
      double score = 0.0;
      for (const LinkInput& link : links) {
        if (!fill_point(link, x, y, param, di, joint_dims, pt)) {
          score += log_floor;
          continue;
        }
        const double f = joint.eval(std::span<const double>(pt, joint_dims));
        score += f > kDensityFloor ? std::log(f) : log_floor;
      }
      if (score > best_obj) {
        best_obj = score;
        best.x = x;
        best.y = y;
      }
    }
  }
  best.objective = best_obj;
  return best;
}

// ---------------------------------------------------------------------------
// Iterative bias correction

IterativeCorrector IterativeCorrector::from_model(const ModelSet& m,
                                                  double p_los,
                                                  bool condition_on_features,
                                                  BiasPointEstimate pe) {
  IterativeCorrector c;
  c.los_features = m.los_features;
  c.nlos_joint = m.nlos_joint;
  c.p_los = p_los;
  c.condition_on_features = condition_on_features;
  c.point_estimate = pe;
  c.param = m.param;
  c.di = m.di;
  c.unconditional_bias_mean = unconditional_axis0_mean(*m.nlos_joint);
  return c;
}

namespace {

std::vector<double> corrector_features(const LinkInput& link, double range_m,
                                       const IterativeCorrector& c) {
  const FeatureVector& f = link.features;
  const int nfeat = c.los_features->dims();
  if (c.param == Parameterization::kDistanceDependent) {
    if (nfeat == 1) return {f.delay_spread};
    return {f.peak_amplitude, f.mean_excess_delay, f.delay_spread};
  }
  const double d = std::max(range_m, 1e-3);
  if (nfeat == 1) return {(f.delay_spread - c.di.delay_spread_floor) / d};
  return {f.peak_amplitude + c.di.peak_slope * d, f.mean_excess_delay / d,
          (f.delay_spread - c.di.delay_spread_floor) / d};
}

}  // namespace

CorrectionResult iterative_correct(const LinkInput& link,
                                   const IterativeCorrector& c) {
  if (!c.los_features || !c.nlos_joint)
    throw ConfigError("iterative_correct: corrector has no densities");
  if (c.nlos_joint->dims() != c.los_features->dims() + 1)
    throw ConfigError("iterative_correct: density ranks disagree");

  CorrectionResult r;
  double bias = 0.0;
  for (int k = 0; k < c.max_iter; ++k) {
    ++r.iterations;
    const double range = kSpeedOfLight * (link.toa - bias);
    const std::vector<double> x = corrector_features(link, range, c);

    const double score_los = c.p_los * c.los_features->eval(x);
    const double score_nlos =
        (1.0 - c.p_los) * c.nlos_joint->marginal_over_axis0(x);
    bool fallback = false;
    ChannelState decision;
    if (score_los <= 0.0 && score_nlos <= 0.0) {
      // Features unseen under both hypotheses: decide on the prior alone.
      decision = c.p_los >= 0.5 ? ChannelState::kLos : ChannelState::kNlos;
      fallback = true;
    } else {
      decision =
          score_los >= score_nlos ? ChannelState::kLos : ChannelState::kNlos;
    }

    double next = 0.0;
    if (decision == ChannelState::kNlos) {
      if (!c.condition_on_features) {
        next = c.unconditional_bias_mean;
      } else if (fallback || c.nlos_joint->marginal_over_axis0(x) <= 0.0) {
        next = c.unconditional_bias_mean;
      } else if (c.point_estimate == BiasPointEstimate::kPosteriorMean) {
        next = c.nlos_joint->mean_of_axis0(x);
      } else {
        next = c.nlos_joint->mode_of_axis0(x);
      }
    }

    r.decision = decision;
    r.prior_fallback = fallback;
    const bool converged = std::fabs(next - bias) < c.tol;
    bias = next;
    if (converged) break;
  }
  r.bias_estimate = bias;
  r.corrected_toa = link.toa - bias;
  return r;
}

PositionEstimate corrected_ls_estimate(std::span<const LinkInput> links,
                                       const IterativeCorrector& c,
                                       const GridSpec& grid) {
  std::vector<LinkInput> corrected(links.begin(), links.end());
  std::vector<double> biases(links.size());
  std::vector<ChannelState> decisions(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    const CorrectionResult r = iterative_correct(links[i], c);
    corrected[i].toa = r.corrected_toa;
    biases[i] = r.bias_estimate;
    decisions[i] = r.decision;
  }
  PositionEstimate est = ls_estimate(corrected, grid);
  est.bias_estimates = std::move(biases);
  est.decisions = std::move(decisions);
  return est;
}

// ---------------------------------------------------------------------------
// Estimator family

const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::kLs: return "LS";
    case EstimatorKind::kVe: return "VE";
    case EstimatorKind::kMl2d: return "ML-2D";
    case EstimatorKind::kMl4d: return "ML-4D";
    case EstimatorKind::kMl2dId: return "ML-2D-ID";
    case EstimatorKind::kMl4dF: return "ML-4D-F";
    case EstimatorKind::kMl2dIt: return "ML-2D-IT";
    default: return "ML-4D-IT";
  }
}

EstimatorKind estimator_from_string(const std::string& name) {
  for (EstimatorKind k : all_estimators())
    if (name == to_string(k)) return k;
  throw ConfigError("unknown estimator '" + name + "'");
}

const std::vector<EstimatorKind>& all_estimators() {
  static const std::vector<EstimatorKind> kAll = {
      EstimatorKind::kLs,     EstimatorKind::kVe,     EstimatorKind::kMl2d,
      EstimatorKind::kMl4d,   EstimatorKind::kMl2dId, EstimatorKind::kMl4dF,
      EstimatorKind::kMl2dIt, EstimatorKind::kMl4dIt};
  return kAll;
}

EstimatorBank::EstimatorBank(Models models, double p_los_model,
                             BiasPointEstimate pe)
    : models_(std::move(models)),
      p_los_model_(p_los_model),
      point_estimate_(pe) {
  if (models_.smooth_2d_dd) {
    mix_2d_dd_ = make_mixture(*models_.smooth_2d_dd, p_los_model_);
    ve_ = std::make_shared<IterativeCorrector>(IterativeCorrector::from_model(
        *models_.smooth_2d_dd, p_los_model_, false, point_estimate_));
    it_2d_ = std::make_shared<IterativeCorrector>(IterativeCorrector::from_model(
        *models_.smooth_2d_dd, p_los_model_, true, point_estimate_));
  }
  if (models_.smooth_4d_dd) {
    mix_4d_dd_ = make_mixture(*models_.smooth_4d_dd, p_los_model_);
    it_4d_ = std::make_shared<IterativeCorrector>(IterativeCorrector::from_model(
        *models_.smooth_4d_dd, p_los_model_, true, point_estimate_));
  }
  if (models_.smooth_2d_di)
    mix_2d_di_ = make_mixture(*models_.smooth_2d_di, p_los_model_);
  if (models_.poly_4d_dd)
    mix_4d_poly_ = make_mixture(*models_.poly_4d_dd, p_los_model_);
}

const ModelSet& EstimatorBank::require(
    const std::shared_ptr<const ModelSet>& m, EstimatorKind k) const {
  if (!m)
    throw DataError(std::string("estimator ") + to_string(k) +
                    " needs a fitted model that was not provided");
  return *m;
}

PositionEstimate EstimatorBank::run(EstimatorKind k,
                                    std::span<const LinkInput> links,
                                    const GridSpec& grid) const {
  switch (k) {
    case EstimatorKind::kLs:
      return ls_estimate(links, grid);
    case EstimatorKind::kMl2d: {
      const ModelSet& m = require(models_.smooth_2d_dd, k);
      return ml_estimate(links, *mix_2d_dd_, 2, m.param, &m.di, grid);
    }
    case EstimatorKind::kMl4d: {
      const ModelSet& m = require(models_.smooth_4d_dd, k);
      return ml_estimate(links, *mix_4d_dd_, 4, m.param, &m.di, grid);
    }
    case EstimatorKind::kMl2dId: {
      const ModelSet& m = require(models_.smooth_2d_di, k);
      return ml_estimate(links, *mix_2d_di_, 2, m.param, &m.di, grid);
    }
    case EstimatorKind::kMl4dF: {
      const ModelSet& m = require(models_.poly_4d_dd, k);
      return ml_estimate(links, *mix_4d_poly_, 4, m.param, &m.di, grid);
    }
    case EstimatorKind::kVe: {
      require(models_.smooth_2d_dd, k);
      return corrected_ls_estimate(links, *ve_, grid);
    }
    case EstimatorKind::kMl2dIt: {
      require(models_.smooth_2d_dd, k);
      return corrected_ls_estimate(links, *it_2d_, grid);
    }
    default: {
      require(models_.smooth_4d_dd, k);
      return corrected_ls_estimate(links, *it_4d_, grid);
    }
  }
}

}  // namespace uwb
