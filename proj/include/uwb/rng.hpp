#pragma once

#include <cstdint>
#include <random>

namespace uwb {

using Rng = std::mt19937_64;

/// splitmix64 finalizer, used to decorrelate seed material.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Independent substream for (seed, stream). Streams derived this way can run
/// in parallel without changing any result that is indexed by stream id.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix64(mix64(seed) ^ mix64(stream + 0x517cc1b727220a95ull)));
}

}  // namespace uwb
