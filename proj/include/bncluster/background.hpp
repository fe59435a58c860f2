#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "bncluster/types.hpp"

namespace bnc {

/// Pluggable background solution data: pointwise value/gradient plus the
/// boundary quantities the reduction consumes. s0 is the outward-normal
/// derivative at the chart base point (negative by the Hopf sign), A the
/// tangential Hessian of the normal-derivative map there.
struct U0Field {
  int dim = 7;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  double s0 = -1.0;
  Eigen::MatrixXd A;             // (dim-1) x (dim-1), symmetric
  bool A_positive_definite = false;
};

/// Analytic mock on the half-space {x_N > 0}:
///   u0(x) = x_N * q(x') * chi(|x|),   q(x') = -s0 - 0.5 <A x', x'>,
/// with chi a smooth bump equal to 1 on |x| <= cutoff/2 and 0 outside
/// |x| <= cutoff. Reproduces (s0, 0, A) for the normal-derivative data at
/// the origin exactly.
U0Field mock_u0(int dim, double s0, const Eigen::MatrixXd& A, double cutoff);

/// Radial Dirichlet profile on an annulus by shooting on the inner slope.
struct ShootingResult {
  double a = 0, b = 0;
  int dim = 7;
  double slope = 0;                   // u'(a) at the root
  double deriv_a = 0, deriv_b = 0;    // boundary derivatives
  std::vector<double> r, u, v, acc;   // dense profile: u, u', u''
  double end_value = 0;               // |u(b)| actually achieved
  double profile_error = 0;           // step-doubling sup-norm estimate
};

/// Solves u'' + (N-1)/r u' + |u|^{p-1}u = 0, u(a) = 0 = u(b), u > 0 in
/// between, by bisection on m = u'(a). Throws if no bracket is found,
/// reporting the scanned slope interval.
ShootingResult shoot_annulus_u0(double a, double b, int dim, double tol);

/// Field view of a shooting profile (value/gradient by C^1 Hermite
/// interpolation). The tangential Hessian of the normal derivative is
/// identically zero by rotational symmetry, so this provider is for
/// field-level tests only, never for reduction runs.
U0Field annulus_u0_field(const ShootingResult& sr);

}  // namespace bnc
