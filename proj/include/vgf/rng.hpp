#pragma once

#include <cstdint>
#include <limits>

namespace vgf {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key of the independent stream owned by one (seed, replica, cell) triple.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t replica,
                                          std::uint64_t cell) {
  return splitmix64(splitmix64(splitmix64(seed) ^ replica) ^ cell);
}

/// SplitMix64 in counter mode: output i of a stream is a bijective mix of
/// key + i * gamma. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    const std::uint64_t z = splitmix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return z;
  }

 private:
  std::uint64_t state_;
};

}  // namespace vgf
