#pragma once

#include <cmath>
#include <cstdint>

#include "ftspe/geometry.hpp"

namespace ftspe {

// Deterministic stream generator used everywhere noise is drawn.
//
// splitmix64 mixing of an incrementing counter; uniforms take the top 53 bits;
// gaussians use the Box-Muller cosine branch (two uniform draws per variate,
// the sine value is discarded). The algorithm name below is written into every
// log header so a reimplementation in another language can match streams
// exactly. std::* distributions are avoided on purpose: they are
// implementation-defined.
class SplitMix64 {
 public:
  static constexpr const char* kAlgorithm = "splitmix64+box-muller(cos)";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]: never returns 0 so log() below is always finite.
  double uniform01() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  Vec3 gaussian_vec3(double std_dev) {
    return {std_dev * gaussian(), std_dev * gaussian(), std_dev * gaussian()};
  }

  // Per-axis uniform with the requested standard deviation (half-width
  // std * sqrt(3)).
  Vec3 uniform_vec3_with_std(double std_dev) {
    const double h = std_dev * std::sqrt(3.0);
    return {uniform(-h, h), uniform(-h, h), uniform(-h, h)};
  }

 private:
  std::uint64_t state_;
};

}  // namespace ftspe
