#pragma once

#include <cstdint>
#include <random>

namespace qcert {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seedable, splittable stream. Child streams are a pure function of the
// parent seed and the child index, so trials can be run in any order.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  RngStream split(std::uint64_t index) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
  }

  std::mt19937_64& engine() { return engine_; }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

} // namespace qcert
