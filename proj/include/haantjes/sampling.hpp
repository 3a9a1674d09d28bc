#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "haantjes/expr.hpp"

namespace haantjes {

inline constexpr std::uint64_t kDefaultSeed = 20250101;

struct SampleConfig {
  std::uint64_t seed = kDefaultSeed;
  int count = 64;
  double lo = -2.0;
  double hi = 2.0;
  /// Points where a guard expression is smaller than this in magnitude are
  /// redrawn.
  double guard_min = 1e-3;
  int max_attempts_per_point = 1000;
};

struct SampleSet {
  std::vector<std::vector<double>> points;
  std::uint64_t seed = 0;
};

/// Uniform doubles from a 64-bit Mersenne twister. The conversion uses the
/// top 53 bits directly (std::uniform_real_distribution is implementation
/// defined), so streams agree across standard libraries.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 engine_;
};

/// Deterministic points in [lo, hi]^{2n}. A draw is rejected when any guard
/// is below guard_min in magnitude or cannot be evaluated.
SampleSet admissible_samples(const Chart& chart, const SampleConfig& config,
                             std::span<const Expression> guards = {},
                             std::span<const double> params = {});

}  // namespace haantjes
