#pragma once
// Deterministic substream RNG. Every consumer owns a Stream forked from a
// master seed and a stream index, so what one stream produces never depends
// on how many draws other streams made.
//
// The contract is fixed for reproducibility: engines are std::mt19937_64
// (fully specified by the standard) seeded with a splitmix64 scramble of
// (seed, stream index); uniforms take the top 53 bits; normals come from
// Box-Muller on our own uniforms, so no library distribution with
// unspecified output order is involved.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace segrisk::rng {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
  (void)splitmix64_next(s);
  return splitmix64_next(s);
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream) : engine_(stream_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // unbiased integer on [0, n); n must be nonzero
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t reject_under = (0ull - n) % n;
    std::uint64_t x = next_u64();
    while (x < reject_under) x = next_u64();
    return x % n;
  }

  // standard normal via Box-Muller; consumes exactly two draws, no state
  double normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// In-place Fisher-Yates driven by the stream.
template <typename T>
void shuffle(std::vector<T>& v, Stream& stream) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[stream.below(i)]);
}

}  // namespace segrisk::rng
