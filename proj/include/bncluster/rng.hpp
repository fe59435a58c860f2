#pragma once

#include <cmath>
#include <cstdint>

#include "bncluster/types.hpp"

namespace bnc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// xoshiro256++ stream. Self-contained so that results are identical
/// across standard libraries; every Monte-Carlo block owns one stream
/// seeded from (seed, block index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  static Rng for_block(std::uint64_t seed, std::uint64_t block) {
    std::uint64_t sm = seed ^ (0xD1B54A32D192ED03ull * (block + 1));
    return Rng(splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// uniform in (0,1], safe as a log argument
  double uniform_pos() { return 1.0 - uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Marsaglia-Tsang for shape >= 1, boost trick below 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  /// Uniform direction on the unit sphere of R^dim.
  void direction(int dim, Vec& out) {
    out.resize(dim);
    double n2;
    do {
      for (int i = 0; i < dim; ++i) out[i] = normal();
      n2 = out.squaredNorm();
    } while (n2 == 0.0);
    out /= std::sqrt(n2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Neumaier-compensated accumulator; blocks combine in a fixed order so
/// reductions do not depend on scheduling.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace bnc
