#pragma once

#include <cstdint>
#include <random>

namespace rqed {

/// Seeded generator with a platform-independent stream: std::mt19937_64
/// (fully specified by the standard) and uniform doubles built from the top
/// 53 bits, so no implementation-defined distribution is involved.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rqed
