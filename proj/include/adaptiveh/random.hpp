#pragma once

#include <cstdint>
#include <random>

namespace adaptiveh {

using Rng = std::mt19937_64;

// Stream identifiers for derive_seed. Each source of randomness in a run
// draws from its own stream so configurations can share random numbers.
enum class Stream : std::uint32_t {
  kEpisodeReset = 1,
  kPolicy = 2,
  kDrift = 3,
  kObservationNoise = 4,
  kRandomAgent = 5,
};

/// Split function: feeds (master, stream, index) through std::seed_seq and
/// packs the first two generated words into a 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                 std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

inline Rng make_rng(std::uint64_t master, Stream stream,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

}  // namespace adaptiveh
