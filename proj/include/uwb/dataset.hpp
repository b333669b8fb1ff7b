#pragma once

#include <filesystem>
#include <vector>

#include "uwb/synth.hpp"

namespace uwb {

/// Writes one record per line after a mandatory header:
///   id,state,d_m,b_s,toa_s,sample_rate_hz,t_start_s,n_samples,samples_hex
/// Scalars use shortest round-trip decimal form, samples are hex encoded
/// IEEE754 doubles, so a round trip is bit exact.
void write_dataset(const std::vector<LinkObservation>& obs,
                   const std::filesystem::path& path);

/// Throws DataError with the offending line index on malformed input.
std::vector<LinkObservation> read_dataset(const std::filesystem::path& path);

}  // namespace uwb
