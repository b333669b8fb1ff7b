#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "uwb/estimators.hpp"
#include "uwb/rng.hpp"
#include "uwb/synth.hpp"

namespace uwb {

/// Link pools the trials draw from, with features extracted once per record.
struct Pools {
  std::vector<LinkObservation> los, nlos;
  std::vector<FeatureVector> los_features, nlos_features;

  static Pools from_observations(std::vector<LinkObservation> los,
                                 std::vector<LinkObservation> nlos);
};

struct ScenarioConfig {
  int n_anchors = 3;
  std::vector<double> p_los_values{0.0, 0.2, 0.5, 0.9, 1.0};
  int trials = 1000;
  std::vector<EstimatorKind> estimators = all_estimators();
  double grid_step = 0.01;   // m
  double grid_margin = 1.0;  // m around the anchor hull
  std::uint64_t seed = 1;
  int threads = 0;  // 0 uses the hardware count
};

void validate(const ScenarioConfig& cfg);

struct SweepCell {
  EstimatorKind estimator{};
  double p_los = 0.0;
  std::vector<double> errors;  // m, per trial

  double rmse() const;
};

struct ScenarioResult {
  /// Estimator-major, p_los-minor, in configuration order.
  std::vector<SweepCell> cells;
};

/// One scene: the node sits at the origin, each anchor takes a pool draw
/// (LOS with probability p_los) and is placed on the ray at angle
/// 2*pi*(i-1)/n_anchors at the drawn link distance. Already-noisy records
/// are used as is.
struct Scene {
  std::vector<LinkInput> links;
  std::vector<ChannelState> states;  // drawn condition per link
  GridSpec grid;
};

Scene build_scene(const ScenarioConfig& cfg, const Pools& pools, double p_los,
                  Rng& rng);

/// Runs every configured estimator on one scene draw and returns the
/// position error of each.
std::vector<double> run_trial(const ScenarioConfig& cfg, const Pools& pools,
                              const EstimatorBank& bank, double p_los,
                              Rng& rng);

/// Full sweep over p_los values and trials. Trials run on substreams derived
/// from (seed, p index, trial index), so results do not depend on the thread
/// count and repeat byte for byte under a fixed seed.
ScenarioResult run_sweep(const ScenarioConfig& cfg, const Pools& pools,
                         const EstimatorBank& bank);

void write_rmse_csv(const ScenarioResult& r, const std::filesystem::path& path);
void write_cdf_csv(const ScenarioResult& r, const std::filesystem::path& path);

}  // namespace uwb
