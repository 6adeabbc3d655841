#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qmimo {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream key from a root seed and a path of indices,
// e.g. (seed, channel) or (seed, restart, iteration). Streams do not depend on
// the order in which they are requested.
inline std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  for (std::uint64_t p : path) key = splitmix64(key ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return key;
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key) : engine_(key) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) : engine_(stream_key(seed, path)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool coin() { return (engine_() >> 63) != 0; }
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qmimo
