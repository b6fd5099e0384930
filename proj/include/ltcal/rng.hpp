#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace ltcal {

// Deterministic random source with pinned sampling algorithms.
//
// The engine is std::mt19937_64, whose output stream is fixed by the
// standard. The distributions are implemented here instead of using
// <random>'s, whose output is implementation-defined: uniform doubles take
// the top 53 bits of one draw, normals use the Marsaglia polar method with a
// cached spare, and bounded indices use rejection sampling. Fixtures and
// file-level reproducibility depend on this exact stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * next_unit() - 1.0;
      v = 2.0 * next_unit() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Unbiased index in [0, n).
  std::size_t next_index(std::size_t n) {
    const std::uint64_t span = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % span);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ltcal
