#include "uwb/synth.hpp"

#include <cmath>
#include <cstddef>

#include "uwb/errors.hpp"

namespace uwb {

const char* to_string(ChannelState s) {
  return s == ChannelState::kLos ? "LOS" : "NLOS";
}

ChannelState channel_state_from_string(const std::string& s) {
  if (s == "LOS") return ChannelState::kLos;
  if (s == "NLOS") return ChannelState::kNlos;
  throw DataError("unknown channel state '" + s + "'");
}

void validate(const SynthParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("synth: ") + name + " must be positive");
  };
  positive(p.t_wall, "t_wall");
  positive(p.gamma, "gamma");
  positive(p.sigma_n_sq, "sigma_n_sq");
  positive(p.beta, "beta");
  positive(p.multipath_decay, "multipath_decay");
  positive(p.tap_rate, "tap_rate");
  positive(p.tap_amp_scale, "tap_amp_scale");
  positive(p.nlos_direct_atten_db, "nlos_direct_atten_db");
  positive(p.sample_rate, "sample_rate");
  positive(p.duration, "duration");
  positive(p.pulse_rise, "pulse_rise");
  if (!(p.sample_noise >= 0.0))
    throw ConfigError("synth: sample_noise must be non-negative");
  if (!(p.wall_refractive_index > 1.0))
    throw ConfigError("synth: wall_refractive_index must exceed 1");
  if (!(p.incidence_angle_max > 0.0) ||
      !(p.incidence_angle_max < 3.14159265358979323846 / 2.0))
    throw ConfigError("synth: incidence_angle_max must lie in (0, pi/2)");
}

double min_nlos_bias(const SynthParams& p) {
  return p.t_wall * (p.wall_refractive_index - 1.0) / kSpeedOfLight;
}

double toa_noise_variance(const SynthParams& p, double distance_m) {
  return p.gamma * p.sigma_n_sq * std::pow(distance_m, p.beta);
}

namespace {

// Causal pulse rising from zero at t0 and peaking at t0 + rise:
// a * x * exp(1 - x) with x = (t - t0) / rise. Negligible past x ~ 40.
void add_pulse(std::vector<double>& samples, double sample_rate, double t0,
               double amplitude, double rise) {
  const double t_cut = t0 + 40.0 * rise;
  std::size_t k = t0 <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t0 * sample_rate));
  for (; k < samples.size(); ++k) {
    const double t = k / sample_rate;
    if (t > t_cut) break;
    const double x = (t - t0) / rise;
    if (x <= 0.0) continue;
    samples[k] += amplitude * x * std::exp(1.0 - x);
  }
}

}  // namespace

LinkObservation synth_link(double distance_m, ChannelState state,
                           const SynthParams& p, Rng& rng) {
  if (!(distance_m > 0.0) || !std::isfinite(distance_m))
    throw DomainError("synth_link: distance must be positive");
  validate(p);

  double bias = 0.0;
  double direct_gain = 1.0;
  if (state == ChannelState::kNlos) {
    std::uniform_real_distribution<double> angle(0.0, p.incidence_angle_max);
    const double cos_phi = std::cos(angle(rng));
    // Traversal grows as 1/cos(phi): more extra delay and more wall loss.
    bias = min_nlos_bias(p) / cos_phi;
    direct_gain = std::pow(10.0, -p.nlos_direct_atten_db / cos_phi / 20.0);
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  const double toa_noise = gauss(rng) * std::sqrt(toa_noise_variance(p, distance_m));

  Waveform w;
  w.sample_rate = p.sample_rate;
  w.t_start = 0.0;
  w.samples.assign(
      static_cast<std::size_t>(std::llround(p.duration * p.sample_rate)), 0.0);

  const double path_amp = std::pow(distance_m, -p.beta / 2.0);
  const double t_arrival = distance_m / kSpeedOfLight + bias;
  add_pulse(w.samples, p.sample_rate, t_arrival, path_amp * direct_gain,
            p.pulse_rise);

  // Diffuse taps: Poisson arrivals after the direct path with an
  // exponentially decaying power profile. Only the direct path pays the
  // wall attenuation, so NLOS records are multipath heavy.
  std::exponential_distribution<double> gap(p.tap_rate);
  const double window_end = w.t_end();
  for (double t = t_arrival + gap(rng); t < window_end; t += gap(rng)) {
    const double envelope = std::exp(-(t - t_arrival) / (2.0 * p.multipath_decay));
    const double amp = path_amp * p.tap_amp_scale * gauss(rng) * envelope;
    add_pulse(w.samples, p.sample_rate, t, amp, p.pulse_rise);
  }

  if (p.sample_noise > 0.0) {
    for (double& s : w.samples) s += p.sample_noise * gauss(rng);
  }

  LinkObservation obs;
  obs.waveform = std::move(w);
  obs.toa_est = std::max(0.0, distance_m / kSpeedOfLight + bias + toa_noise);
  obs.true_distance = distance_m;
  obs.true_bias = bias;
  obs.state = state;
  return obs;
}

}  // namespace uwb
