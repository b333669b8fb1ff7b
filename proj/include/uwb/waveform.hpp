#pragma once

#include <cstddef>
#include <vector>

namespace uwb {

constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Uniformly sampled amplitude record. Times are referred to the transmit
/// instant; sample k sits at t_start + k / sample_rate.
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz
  double t_start = 0.0;      // s

  std::size_t size() const { return samples.size(); }
  double sample_period() const { return 1.0 / sample_rate; }
  double duration() const { return samples.size() / sample_rate; }
  double time_of(std::size_t k) const { return t_start + k / sample_rate; }
  /// Time just past the last sample.
  double t_end() const { return t_start + duration(); }
};

/// Throws DomainError if the record is empty, has a non-positive sample rate
/// or carries non-finite samples.
void validate(const Waveform& w);

/// Leading-edge TOA detector. Finds the earliest sample whose magnitude
/// exceeds threshold_fraction * max|r|, then walks back to the last sample
/// below the noise floor before that onset run. The floor is estimated from
/// the samples preceding the crossing. Deterministic for a fixed record.
double estimate_toa(const Waveform& w, double threshold_fraction = 0.2);

}  // namespace uwb
