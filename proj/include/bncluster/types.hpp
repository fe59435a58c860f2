#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace bnc {

// Spatial dimension is a runtime value in 7..12, so points live in
// dynamic-size vectors with a fixed stack capacity (no heap traffic in
// the sampling loops).
inline constexpr int kMaxDim = 16;

template <class Scalar>
using VecK = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

template <class Scalar>
using MatK = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using Vec = VecK<double>;
using Mat = MatK<double>;

/// base^(halves/2) for integer `halves`; sqrt+integer powers only.
/// The bubble kernels use half-integer exponents in odd dimensions, and
/// std::pow dominates the sampling loops otherwise.
template <class Scalar>
Scalar pow_half(Scalar base, int halves) {
  using std::sqrt;
  bool neg = halves < 0;
  unsigned h = static_cast<unsigned>(neg ? -halves : halves);
  Scalar acc = Scalar(1);
  Scalar sq = base;
  for (unsigned e = h / 2; e != 0; e >>= 1) {
    if (e & 1u) acc *= sq;
    sq *= sq;
  }
  if (h & 1u) acc *= sqrt(base);
  return neg ? Scalar(1) / acc : acc;
}

}  // namespace bnc
