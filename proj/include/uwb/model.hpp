#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "uwb/density.hpp"
#include "uwb/features.hpp"
#include "uwb/synth.hpp"

namespace uwb {

enum class DensityKind { kHist, kSmooth, kPoly };
enum class Parameterization { kDistanceDependent, kDistanceIndependent };

const char* to_string(DensityKind k);
const char* to_string(Parameterization p);
DensityKind density_kind_from_string(const std::string& s);
Parameterization parameterization_from_string(const std::string& s);

/// A fitted statistical model of one feature space: the NLOS joint over
/// (bias, features), the LOS feature density with its analytic Gaussian bias
/// factor, and the distance-trend parameters the transforms need.
struct ModelSet {
  Parameterization param = Parameterization::kDistanceDependent;
  DensityKind kind = DensityKind::kSmooth;
  int feature_dims = 1;  // 1 (delay spread only) or 3
  double bias_sigma = 0.0;
  DIModelParams di;
  std::shared_ptr<const Density> los_features;  // rank feature_dims
  std::shared_ptr<const Density> nlos_joint;    // rank feature_dims + 1
};

struct FitOptions {
  int bins_2d = 25;
  int bins_4d = 12;
  int refine_2d = 8;
  int refine_4d = 3;
  double window_fraction = 1.0 / 15.0;
  int poly_degree = 8;
  /// Gaussian blur along the bias axis of the NLOS joint, the implicit
  /// stand-in for convolving with the ranging-noise pdf. Negative picks the
  /// width fitted from the LOS residuals, 0 disables, positive is explicit
  /// (seconds).
  double bias_blur_sigma = -1.0;
  /// Empty bins added around the data range of each feature axis, so the
  /// filters have room to form tails. The bias axis is padded one bin below
  /// (the null region allows no more) and pad_bins above.
  int pad_bins = 10;
  /// Width, in data bins, of the regularizing blur applied to the feature
  /// axes of the LOS feature density. 0 disables.
  double feature_blur_bins = 2.5;
};

/// Fits the model of the requested kind on the given pools. joint_dims is 2
/// (bias + delay spread) or 4 (bias + peak, excess delay, delay spread); the
/// bias axis carries the true bias of the training links.
ModelSet fit_model(const std::vector<LinkObservation>& los,
                   const std::vector<LinkObservation>& nlos,
                   DensityKind kind, int joint_dims, Parameterization param,
                   const FitOptions& opt);

/// LOS joint over (bias, features) with the Gaussian bias factor attached.
std::shared_ptr<const Density> make_los_joint(const ModelSet& m);

/// Mixture p_los * f_los + (1 - p_los) * f_nlos over the joint space.
std::shared_ptr<const MixtureDensity> make_mixture(const ModelSet& m,
                                                   double p_los = 0.5);

void save_model(const ModelSet& m, const std::filesystem::path& path);
ModelSet load_model(const std::filesystem::path& path);

/// Conventional file name for a fitted model, e.g. "smooth-2d-dd.model".
std::string model_file_name(DensityKind kind, int joint_dims,
                            Parameterization param);

}  // namespace uwb
