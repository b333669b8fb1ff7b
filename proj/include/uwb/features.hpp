#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "uwb/synth.hpp"
#include "uwb/waveform.hpp"

namespace uwb {

/// Waveform shape statistics. All time quantities are measured from the TOA
/// estimate of the record, so records from different links share a common
/// time frame. Integrals run over the whole acquired window using the
/// trapezoidal rule on the samples.
struct FeatureVector {
  double peak_amplitude = 0.0;     // max |r|
  double mean_excess_delay = 0.0;  // s, first moment of |r|^2 / energy
  double delay_spread = 0.0;       // s^2, second central moment of the same
  double energy = 0.0;             // amplitude^2 * s
  double rise_time = 0.0;          // s, gap between 0.1 and 0.9 peak crossings
  double kurtosis = 0.0;           // fourth moment of |r| over the window
};

/// Distance-independent transforms of the three features most tied to the
/// NLOS bias. Valid for a fixed link distance; invertible given the same
/// model parameters.
struct DIFeatureVector {
  double peak_at_origin = 0.0;      // peak_amplitude + peak_slope * d
  double excess_delay_per_m = 0.0;  // mean_excess_delay / d
  double delay_spread_per_m = 0.0;  // (delay_spread - floor) / d
};

/// Slope/intercept of the linear distance trends, fitted once per dataset.
struct DIModelParams {
  double peak_slope = 0.0;          // amplitude / m, decay of peak with d
  double delay_spread_floor = 0.0;  // s^2, delay spread extrapolated to d=0
};

FeatureVector extract_features(const Waveform& w, double toa_s);

/// Least-squares lines peak_amplitude(d) and delay_spread(d) over the given
/// observations. Needs at least two distinct distances.
DIModelParams fit_di_model(const std::vector<LinkObservation>& obs);

DIFeatureVector to_distance_independent(const FeatureVector& x, double distance_m,
                                        const DIModelParams& p);

/// Inverse map; returns {peak_amplitude, mean_excess_delay, delay_spread}.
std::array<double, 3> invert_distance_independent(const DIFeatureVector& x,
                                                  double distance_m,
                                                  const DIModelParams& p);

/// Absolute Pearson correlation of the true bias with each feature, the link
/// distance and the three distance-independent parameters, split by channel
/// state. Cells whose inputs have zero variance hold NaN.
struct CorrelationReport {
  static constexpr int kColumns = 10;
  static const std::array<const char*, kColumns> kColumnNames;
  std::array<double, kColumns> nlos{};
  std::array<double, kColumns> los{};
  int n_nlos = 0;
  int n_los = 0;
};

CorrelationReport correlation_report(const std::vector<LinkObservation>& obs,
                                     const DIModelParams& p);

/// Two tab-separated blocks: bias vs raw features + distance, then bias vs
/// the distance-independent parameters.
void write_correlation_report(const CorrelationReport& r, std::ostream& out);

}  // namespace uwb
