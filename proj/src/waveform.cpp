#include "uwb/waveform.hpp"

#include <cmath>
#include <cstddef>

#include "uwb/errors.hpp"

namespace uwb {

void validate(const Waveform& w) {
  if (w.samples.empty()) throw DomainError("waveform: empty sample record");
  if (!(w.sample_rate > 0.0))
    throw DomainError("waveform: sample_rate must be positive");
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw DomainError("waveform: non-finite sample");
  }
}

double estimate_toa(const Waveform& w, double threshold_fraction) {
  validate(w);
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
    throw ConfigError("estimate_toa: threshold_fraction must be in (0,1)");

  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::fabs(s));
  if (peak == 0.0) throw NoSignalError("estimate_toa: all-zero waveform");

  const double threshold = threshold_fraction * peak;
  std::size_t cross = 0;
  while (std::fabs(w.samples[cross]) <= threshold) ++cross;

  // Noise floor from the signal-free run ahead of the crossing.
  double acc = 0.0;
  for (std::size_t k = 0; k < cross; ++k) acc += w.samples[k] * w.samples[k];
  const double rms = cross > 0 ? std::sqrt(acc / cross) : 0.0;
  const double floor = std::max(3.5 * rms, 1e-3 * peak);

  std::size_t onset = cross;
  while (onset > 0 && std::fabs(w.samples[onset - 1]) >= floor) --onset;
  // Report the quiet sample just before the onset run.
  return w.time_of(onset > 0 ? onset - 1 : 0);
}

}  // namespace uwb
