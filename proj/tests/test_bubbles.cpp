#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bncluster/bubbles.hpp"
#include "support.hpp"

using namespace bnc;
using bnc::testing::fd_laplacian;
using bnc::testing::random_point;

namespace {
constexpr int N = 7;

Bubble standard_bubble(int dim = N) {
  return Bubble(1.0, Vec::Zero(dim), dim);
}
}  // namespace

TEST_CASE("bubble value at the center and far field") {
  Bubble b = standard_bubble();
  Vec zero = Vec::Zero(N);
  CHECK(bubble_value(b, zero) == doctest::Approx(std::pow(35.0, 1.25)).epsilon(1e-15));

  // far-field limit: U(x) R^{N-2} / alpha_N -> 1
  for (double R : {1e3, 1e5}) {
    Vec x = Vec::Zero(N);
    x[0] = R;
    double ratio = bubble_value(b, x) * std::pow(R, N - 2) / alpha_n(N);
    CHECK(std::abs(ratio - 1.0) < 3.0 / (R * R));
  }
}

TEST_CASE("bubble solves the critical equation (finite-difference oracle)") {
  Bubble b = standard_bubble();
  const double p = critical_p(N);
  Rng rng(991);
  auto f = [&](const Vec& x) { return bubble_value(b, x); };
  for (int trial = 0; trial < 20; ++trial) {
    Vec x = random_point(rng, N, 2.0);
    double up = std::pow(bubble_value(b, x), p);
    double lap = fd_laplacian(f, x);
    CHECK(std::abs(lap + up) <= 1e-5 * up);
  }
}

TEST_CASE("scaling covariance to machine precision") {
  Rng rng(17);
  Bubble unit = standard_bubble();
  for (int trial = 0; trial < 100; ++trial) {
    double delta = std::exp(3.0 * (rng.uniform() - 0.5));
    Vec xi = random_point(rng, N, 1.5);
    Vec x = random_point(rng, N, 3.0);
    Bubble b(delta, xi, N);
    Vec y = (x - xi) / delta;
    double expected = pow_half(delta, -(N - 2)) * bubble_value(unit, y);
    CHECK(bubble_value(b, x) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("bubble gradient matches finite differences") {
  Rng rng(23);
  Bubble b(0.7, random_point(rng, N, 0.5), N);
  auto f = [&](const Vec& x) { return bubble_value(b, x); };
  for (int trial = 0; trial < 10; ++trial) {
    Vec x = random_point(rng, N, 2.0);
    Vec g = bubble_gradient(b, x);
    Vec gfd = bnc::testing::fd_gradient(f, x);
    CHECK((g - gfd).norm() <= 1e-6 * g.norm() + 1e-10);
  }
}

TEST_CASE("kernel functions: closed-form anchors") {
  Bubble b = standard_bubble();
  Vec zero = Vec::Zero(N);
  CHECK(kernel_psi(0, b, zero) ==
        doctest::Approx(alpha_n(N) * (N - 2) / 2.0).epsilon(1e-15));

  Vec on_sphere = Vec::Zero(N);
  on_sphere[2] = 1.0;
  CHECK(kernel_psi(0, b, on_sphere) == doctest::Approx(0.0));

  CHECK(kernel_psi(3, b, zero) == doctest::Approx(0.0));
  CHECK_THROWS_AS(kernel_psi(-1, b, zero), std::out_of_range);
  CHECK_THROWS_AS(kernel_psi(N + 1, b, zero), std::out_of_range);
}

TEST_CASE("psi^0 identity against U and its gradient") {
  Bubble b = standard_bubble();
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    Vec x = random_point(rng, N, 2.5);
    double lhs = kernel_psi(0, b, x);
    double rhs = 0.5 * (N - 2) * bubble_value(b, x) + bubble_gradient(b, x).dot(x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("kernel property: linearized equation holds at random points") {
  Bubble b = standard_bubble();
  const double p = critical_p(N);
  Rng rng(41);
  for (int j = 0; j <= N; ++j) {
    auto f = [&](const Vec& x) { return kernel_psi(j, b, x); };
    for (int trial = 0; trial < 5; ++trial) {
      Vec x = random_point(rng, N, 1.5);
      double lap = fd_laplacian(f, x);
      double pot = p * std::pow(bubble_value(b, x), p - 1.0) * kernel_psi(j, b, x);
      CHECK(std::abs(lap + pot) <= 1e-4 * std::abs(pot) + 1e-9);
    }
  }
}

TEST_CASE("universal constants: two routes agree for N = 7..12") {
  for (int dim = 7; dim <= 12; ++dim) {
    UniversalConstants uc = universal_constants(dim);
    CHECK(uc.alpha_N ==
          doctest::Approx(std::pow(dim * (dim - 2.0), 0.25 * (dim - 2))).epsilon(1e-15));
    CHECK(uc.max_route_gap() <= 1e-10);
    CHECK(uc.C_const > 0.0);
    CHECK(uc.B_const > 0.0);
    CHECK(uc.int_U_2star > 0.0);
    CHECK(uc.warning.empty());
  }
}

TEST_CASE("universal constants: dimension edge cases") {
  CHECK_THROWS_AS(universal_constants(4), std::domain_error);
  CHECK(!universal_constants(5).warning.empty());
  CHECK(!universal_constants(6).warning.empty());
  CHECK(universal_constants(5).B_const > 0.0);
}

TEST_CASE("radial power integral: Beta identity, arctan, divergence") {
  // (a, b) = (N-1, N) equals Beta(N/2, N/2)/2
  double beta_half = 0.5 * std::exp(2.0 * std::lgamma(0.5 * N) - std::lgamma(1.0 * N));
  CHECK(radial_power_integral_beta(N - 1, N) == doctest::Approx(beta_half).epsilon(1e-14));
  QuadResult q = radial_power_integral_quad(N - 1, N);
  CHECK(q.value == doctest::Approx(beta_half).epsilon(1e-12));
  CHECK(q.error <= 1e-12);

  CHECK(radial_power_integral_quad(0, 1).value == doctest::Approx(M_PI / 2).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(radial_power_integral_quad(6, 3), doctest::Contains("a + 1 >= 2b"),
                       std::domain_error);
  CHECK_THROWS_WITH_AS(radial_power_integral_beta(-1, 3), doctest::Contains("a > -1"),
                       std::domain_error);
}

TEST_CASE("bubble construction guards") {
  CHECK_THROWS_AS(Bubble(0.0, Vec::Zero(N), N), std::invalid_argument);
  CHECK_THROWS_AS(Bubble(1.0, Vec::Zero(6), 6), std::invalid_argument);
  CHECK_THROWS_AS(Bubble(1.0, Vec::Zero(5), N), std::invalid_argument);
}

TEST_CASE("core evaluations are generic over the scalar type") {
  BubbleT<long double> b(1.0L, VecK<long double>::Zero(N), N);
  VecK<long double> x = VecK<long double>::Zero(N);
  x[0] = 0.5L;
  long double v = bubble_value(b, x);
  Bubble bd(1.0, Vec::Zero(N), N);
  Vec xd = Vec::Zero(N);
  xd[0] = 0.5;
  CHECK(static_cast<double>(v) == doctest::Approx(bubble_value(bd, xd)).epsilon(1e-14));
  CHECK(static_cast<double>(kernel_psi(0, b, x)) ==
        doctest::Approx(kernel_psi(0, bd, xd)).epsilon(1e-14));
}
