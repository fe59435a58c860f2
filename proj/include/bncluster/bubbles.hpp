#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "bncluster/quadrature.hpp"
#include "bncluster/types.hpp"

namespace bnc {

/// alpha_N = (N(N-2))^{(N-2)/4}, the height normalization that makes the
/// standard bubble solve  Delta U + U^{(N+2)/(N-2)} = 0  on R^N.
inline double alpha_n(int dim) {
  return std::pow(static_cast<double>(dim) * (dim - 2), 0.25 * (dim - 2));
}

/// Critical exponent p = (N+2)/(N-2); p+1 = 2N/(N-2) = 2*.
inline double critical_p(int dim) {
  return static_cast<double>(dim + 2) / (dim - 2);
}

/// Surface measure of the unit sphere S^{N-1}.
inline double sphere_area(int dim) {
  return 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim);
}

/// 1/((N-2)|S^{N-1}|): the constant relating the Newtonian kernel to the
/// Dirac normalization of the Green function.
inline double gamma_n(int dim) { return 1.0 / ((dim - 2) * sphere_area(dim)); }

template <class Scalar>
struct BubbleT {
  Scalar delta = Scalar(1);
  VecK<Scalar> center;
  int dim = 7;

  BubbleT() = default;
  BubbleT(Scalar d, VecK<Scalar> xi, int n) : delta(d), center(std::move(xi)), dim(n) {
    if (!(delta > Scalar(0))) throw std::invalid_argument("bubble: delta must be positive");
    if (dim < 7) throw std::invalid_argument("bubble: dimension must be >= 7");
    if (center.size() != dim) throw std::invalid_argument("bubble: center/dim mismatch");
  }
};

using Bubble = BubbleT<double>;

template <class Scalar, class Derived>
Scalar bubble_value(const BubbleT<Scalar>& b, const Eigen::MatrixBase<Derived>& x) {
  const Scalar r2 = (x - b.center).squaredNorm();
  const Scalar base = b.delta * b.delta + r2;
  return alpha_n(b.dim) * pow_half(b.delta, b.dim - 2) / pow_half(base, b.dim - 2);
}

template <class Scalar, class Derived>
VecK<Scalar> bubble_gradient(const BubbleT<Scalar>& b, const Eigen::MatrixBase<Derived>& x) {
  const VecK<Scalar> s = x - b.center;
  const Scalar base = b.delta * b.delta + s.squaredNorm();
  const Scalar factor = -Scalar(b.dim - 2) * alpha_n(b.dim) *
                        pow_half(b.delta, b.dim - 2) / pow_half(base, b.dim);
  return factor * s;
}

/// Kernel functions of the linearized bubble equation,
///   psi^0 = (N-2)/2 U + x . grad U,   psi^j = dU/dx_j,
/// scaled as psi_{delta,xi}^j(x) = delta^{-(N-2)/2} psi^j((x-xi)/delta).
template <class Scalar, class Derived>
Scalar kernel_psi(int j, const BubbleT<Scalar>& b, const Eigen::MatrixBase<Derived>& x) {
  if (j < 0 || j > b.dim)
    throw std::out_of_range("kernel_psi: index must lie in 0..N");
  const VecK<Scalar> y = (x - b.center) / b.delta;
  const Scalar y2 = y.squaredNorm();
  const Scalar a = alpha_n(b.dim);
  const Scalar scale = pow_half(b.delta, -(b.dim - 2));
  if (j == 0) {
    return scale * a * Scalar(b.dim - 2) / Scalar(2) * (Scalar(1) - y2) /
           pow_half(Scalar(1) + y2, b.dim);
  }
  return scale * (-a) * Scalar(b.dim - 2) * y[j - 1] / pow_half(Scalar(1) + y2, b.dim);
}

/// int_0^inf r^a (1+r^2)^{-b} dr, by the Beta identity.
/// Requires a > -1 and a+1 < 2b.
double radial_power_integral_beta(double a, double b);

/// Same integral by adaptive quadrature: Gauss-Kronrod on [0,1] plus the
/// r -> 1/r substitution for [1,inf). Absolute error target 1e-12.
QuadResult radial_power_integral_quad(double a, double b);

struct UniversalConstants {
  int dim = 0;
  double alpha_N = 0;
  double C_const = 0;      // int U^{2*-1} over R^N
  double B_const = 0;      // (1/2) int U^2
  double int_U_2star = 0;  // int U^{2*}

  // the independent quadrature route, kept for auditing
  double C_quad = 0;
  double B_quad = 0;
  double int_U_2star_quad = 0;

  std::string warning;  // non-empty for dims outside the theorem range

  double max_route_gap() const {
    double g1 = std::abs(C_quad / C_const - 1.0);
    double g2 = std::abs(B_quad / B_const - 1.0);
    double g3 = std::abs(int_U_2star_quad / int_U_2star - 1.0);
    return std::max(g1, std::max(g2, g3));
  }
};

/// Beta-reduction values cross-checked against quadrature; throws if the
/// two routes disagree beyond 1e-9 or if int U^2 diverges (dim < 5).
UniversalConstants universal_constants(int dim);

}  // namespace bnc
