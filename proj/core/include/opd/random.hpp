#pragma once

#include <cstdint>
#include <random>

namespace opd {

// std::mt19937_64 has a standard-mandated output sequence; the standard
// distributions do not, so the draws below are implemented here to keep
// seeded results identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound), rejection-sampled. bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller (no cached second draw).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
};

}  // namespace opd
