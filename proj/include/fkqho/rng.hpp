#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fkqho {

/// Counter-based stream: the state is a pure function of (seed, stream, step),
/// so parallel ensembles replay bit-identically regardless of scheduling.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
    state_ = mix(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    state_ = mix(state_ ^ (0xD1B54A32D192ED03ULL * (step + 1)));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

  /// Uniform index in {0, ..., n-1}.
  std::uint64_t uniform_index(std::uint64_t n) {
    return std::min<std::uint64_t>(static_cast<std::uint64_t>(uniform() * n), n - 1);
  }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    cached_ = rad * std::sin(ang);
    have_cached_ = true;
    return rad * std::cos(ang);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace fkqho
