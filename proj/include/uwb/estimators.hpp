#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "uwb/density.hpp"
#include "uwb/features.hpp"
#include "uwb/model.hpp"
#include "uwb/synth.hpp"

namespace uwb {

struct Anchor {
  double x = 0.0;
  double y = 0.0;
};

/// One ranging link as seen by a position estimator.
struct LinkInput {
  Anchor anchor;
  double toa = 0.0;  // s
  FeatureVector features;
};

/// Square search lattice. Vertices are x_lo + i*step, y_lo + j*step.
struct GridSpec {
  double x_lo = 0.0, x_hi = 0.0;
  double y_lo = 0.0, y_hi = 0.0;
  double step = 0.01;  // m

  static GridSpec covering(std::span<const Anchor> anchors, double margin = 1.0,
                           double step = 0.01);

  int nx() const;
  int ny() const;
  double x(int i) const { return x_lo + i * step; }
  double y(int j) const { return y_lo + j * step; }
};

void validate(const GridSpec& g);

struct PositionEstimate {
  double x = 0.0;
  double y = 0.0;
  /// Attained objective: residual sum of squares for LS (lower is better),
  /// log-likelihood for ML (higher is better).
  double objective = 0.0;
  /// Set when fewer than 3 links were available.
  bool ambiguous = false;
  /// Per-link outputs of the bias corrector, when one ran.
  std::vector<double> bias_estimates;
  std::vector<ChannelState> decisions;
};

/// Exhaustive grid minimizer of sum_i (c0 toa_i - d_i(theta))^2. Ties go to
/// the smallest x, then the smallest y.
PositionEstimate ls_estimate(std::span<const LinkInput> links,
                             const GridSpec& grid);

/// Grid maximizer of the summed per-link log densities. The joint carries
/// the bias on axis 0, evaluated at toa_i - d_i(theta)/c0; features enter
/// raw or transformed to their distance-independent form at d_i(theta).
/// Zero densities are floored so one impossible link cannot veto the grid.
PositionEstimate ml_estimate(std::span<const LinkInput> links,
                             const Density& joint, int joint_dims,
                             Parameterization param, const DIModelParams* di,
                             const GridSpec& grid);

enum class BiasPointEstimate { kPosteriorMean, kMap };

/// Link-by-link channel decision and bias removal. Each round forms the
/// hypothesis scores P(H) * integral_b f(b, x | H) db, decides, then updates
/// the bias estimate: zero under LOS, otherwise a point estimate from the
/// NLOS joint sliced at the observed features.
struct IterativeCorrector {
  std::shared_ptr<const Density> los_features;
  std::shared_ptr<const Density> nlos_joint;
  double p_los = 0.5;
  /// When false the bias update ignores the features (univariate marginals
  /// only), the behaviour of the delay-spread-only baseline.
  bool condition_on_features = true;
  BiasPointEstimate point_estimate = BiasPointEstimate::kPosteriorMean;
  Parameterization param = Parameterization::kDistanceDependent;
  DIModelParams di;
  int max_iter = 10;
  double tol = 1e-12;  // s

  double unconditional_bias_mean = 0.0;  // cached for the univariate mode

  static IterativeCorrector from_model(const ModelSet& m, double p_los,
                                       bool condition_on_features,
                                       BiasPointEstimate pe);
};

struct CorrectionResult {
  double corrected_toa = 0.0;
  double bias_estimate = 0.0;
  ChannelState decision = ChannelState::kLos;
  /// Both hypothesis scores vanished; the decision fell back to the prior.
  bool prior_fallback = false;
  int iterations = 0;
};

CorrectionResult iterative_correct(const LinkInput& link,
                                   const IterativeCorrector& c);

/// Runs the corrector on every link, then LS on the corrected TOAs.
PositionEstimate corrected_ls_estimate(std::span<const LinkInput> links,
                                       const IterativeCorrector& c,
                                       const GridSpec& grid);

enum class EstimatorKind {
  kLs,
  kVe,
  kMl2d,
  kMl4d,
  kMl2dId,
  kMl4dF,
  kMl2dIt,
  kMl4dIt,
};

const char* to_string(EstimatorKind k);
EstimatorKind estimator_from_string(const std::string& name);
const std::vector<EstimatorKind>& all_estimators();

/// Ready-to-run estimator family sharing the fitted models. Immutable after
/// construction; safe to call concurrently.
class EstimatorBank {
 public:
  struct Models {
    std::shared_ptr<const ModelSet> smooth_2d_dd;
    std::shared_ptr<const ModelSet> smooth_4d_dd;
    std::shared_ptr<const ModelSet> smooth_2d_di;
    std::shared_ptr<const ModelSet> poly_4d_dd;
  };

  EstimatorBank(Models models, double p_los_model = 0.5,
                BiasPointEstimate pe = BiasPointEstimate::kPosteriorMean);

  PositionEstimate run(EstimatorKind k, std::span<const LinkInput> links,
                       const GridSpec& grid) const;

 private:
  const ModelSet& require(const std::shared_ptr<const ModelSet>& m,
                          EstimatorKind k) const;

  Models models_;
  double p_los_model_;
  BiasPointEstimate point_estimate_;
  std::shared_ptr<const MixtureDensity> mix_2d_dd_, mix_4d_dd_, mix_2d_di_,
      mix_4d_poly_;
  std::shared_ptr<const IterativeCorrector> ve_, it_2d_, it_4d_;
};

}  // namespace uwb
