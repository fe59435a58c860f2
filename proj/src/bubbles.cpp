#include "bncluster/bubbles.hpp"

#include <cmath>

namespace bnc {
namespace {

void check_radial_exponents(double a, double b) {
  if (!(a > -1.0))
    throw std::domain_error(
        "radial_power_integral: divergent at 0, requires a > -1 (violated: a <= -1)");
  if (!(a + 1.0 < 2.0 * b))
    throw std::domain_error(
        "radial_power_integral: divergent at infinity, requires a + 1 < 2b "
        "(violated: a + 1 >= 2b)");
}

}  // namespace

double radial_power_integral_beta(double a, double b) {
  check_radial_exponents(a, b);
  const double x = 0.5 * (a + 1.0);
  const double y = b - x;
  return 0.5 * std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(b));
}

QuadResult radial_power_integral_quad(double a, double b) {
  check_radial_exponents(a, b);
  auto inner = [a, b](double r) {
    return std::pow(r, a) * std::pow(1.0 + r * r, -b);
  };
  // r -> 1/s maps [1,inf) to (0,1] within the same integrand family.
  const double ap = 2.0 * b - a - 2.0;
  auto outer = [ap, b](double s) {
    return std::pow(s, ap) * std::pow(1.0 + s * s, -b);
  };
  QuadResult lo = integrate_gk(inner, 0.0, 1.0, 5e-13);
  QuadResult hi = integrate_gk(outer, 0.0, 1.0, 5e-13);
  return {lo.value + hi.value, lo.error + hi.error,
          lo.evaluations + hi.evaluations};
}

UniversalConstants universal_constants(int dim) {
  if (dim < 5)
    throw std::domain_error(
        "universal_constants: int U^2 diverges for dim < 5");
  UniversalConstants uc;
  uc.dim = dim;
  uc.alpha_N = alpha_n(dim);
  if (dim < 7)
    uc.warning =
        "dimension below the N >= 7 range of the cluster construction";

  const double p = critical_p(dim);
  const double two_star = p + 1.0;
  const double area = sphere_area(dim);
  const double a_pow_p = std::pow(uc.alpha_N, p);
  const double a_pow_2s = std::pow(uc.alpha_N, two_star);

  // C = int U^p:      radial exponent pair (N-1, (N+2)/2)
  // B = 1/2 int U^2:  pair (N-1, N-2)
  // int U^{2*}:       pair (N-1, N)
  uc.C_const = a_pow_p * area * radial_power_integral_beta(dim - 1, 0.5 * (dim + 2));
  uc.B_const = 0.5 * uc.alpha_N * uc.alpha_N * area *
               radial_power_integral_beta(dim - 1, dim - 2);
  uc.int_U_2star = a_pow_2s * area * radial_power_integral_beta(dim - 1, dim);

  uc.C_quad = a_pow_p * area * radial_power_integral_quad(dim - 1, 0.5 * (dim + 2)).value;
  uc.B_quad = 0.5 * uc.alpha_N * uc.alpha_N * area *
              radial_power_integral_quad(dim - 1, dim - 2).value;
  uc.int_U_2star_quad =
      a_pow_2s * area * radial_power_integral_quad(dim - 1, dim).value;

  if (uc.max_route_gap() > 1e-9)
    throw std::runtime_error(
        "universal_constants: Beta and quadrature routes disagree");
  return uc;
}

}  // namespace bnc
