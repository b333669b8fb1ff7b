#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwb/rng.hpp"
#include "uwb/waveform.hpp"

namespace uwb {

enum class ChannelState { kLos, kNlos };

const char* to_string(ChannelState s);
ChannelState channel_state_from_string(const std::string& s);

/// One ranging link: the received record, the device TOA estimate and the
/// ground truth it was generated from.
struct LinkObservation {
  Waveform waveform;
  double toa_est = 0.0;        // s
  double true_distance = 0.0;  // m
  double true_bias = 0.0;      // s, 0 for LOS links
  ChannelState state = ChannelState::kLos;
};

/// Knobs of the synthetic link generator. Defaults model a PulsON-class
/// indoor setup: about 3 cm ranging noise at 1 m and a 32 cm obstructing
/// wall between the rooms.
struct SynthParams {
  double t_wall = 0.32;              // m, wall thickness
  double wall_refractive_index = 1.5;
  double incidence_angle_max = 1.25;  // rad from the wall normal, < pi/2
  double gamma = 1.113e-21;          // s^2 m^-beta, ~1 cm ranging std at 1 m
  double sigma_n_sq = 1.0;           // dimensionless noise power factor
  double beta = 2.0;                 // path-loss exponent
  double multipath_decay = 15e-9;    // s, tap power decay constant
  double tap_rate = 1e9;             // 1/s, Poisson tap arrival rate
  double tap_amp_scale = 0.12;       // tap amplitude relative to direct path
  double nlos_direct_atten_db = 7.0;  // direct-path loss per normal wall pass
  double sample_rate = 8e9;          // Hz
  double duration = 110e-9;          // s, acquisition window
  double pulse_rise = 0.25e-9;       // s, direct pulse rise constant
  double sample_noise = 0.001;       // additive noise std, amplitude units
  std::uint64_t rng_seed = 1;
};

void validate(const SynthParams& p);

/// Smallest bias the wall geometry allows (normal incidence).
double min_nlos_bias(const SynthParams& p);

/// Variance of the TOA measurement noise at the given distance.
double toa_noise_variance(const SynthParams& p, double distance_m);

/// Draws one link at the given distance and channel state. The stored TOA
/// follows distance/c0 + bias + noise; the record holds a direct-path pulse
/// at distance/c0 + bias (attenuated under NLOS, more so at grazing
/// incidence), decaying random multipath taps and additive sample noise.
LinkObservation synth_link(double distance_m, ChannelState state,
                           const SynthParams& p, Rng& rng);

}  // namespace uwb
