#pragma once

#include <cstdint>
#include <random>

namespace covplan {

enum class StreamPurpose : std::uint32_t { Historical = 1, Trial = 2, Oracle = 3 };

// Independent generator keyed by (seed, replicate, purpose). Any replicate's
// draws can be regenerated without touching the others, so results do not
// depend on how replicates are scheduled across threads.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t replicate, StreamPurpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

}  // namespace covplan
