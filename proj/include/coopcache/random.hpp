#pragma once

// Portable random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are not (their algorithms are
// implementation-defined), so uniform reals and integers are derived from raw
// engine output here.
//
// Stream splitting: every consumer draws from its own substream whose seed is
// splitmix64(splitmix64(seed) ^ tag), with a fixed 64-bit tag per stream.

#include <cstdint>
#include <random>

namespace coopcache {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
  kTopology = 0x746f706f6c6f6779ULL,     // "topology"
  kGroups = 0x67726f7570730000ULL,       // "groups"
  kPermutations = 0x7065726d75746573ULL, // "permutes"
  kTrace = 0x7472616365000000ULL,        // "trace"
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, Stream stream)
      : engine_(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(stream))) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), unbiased (rejection on the top zone).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coopcache
