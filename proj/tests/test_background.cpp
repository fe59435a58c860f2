#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bncluster/background.hpp"
#include "bncluster/bubbles.hpp"
#include "support.hpp"

using namespace bnc;
using bnc::testing::fd_gradient;
using bnc::testing::fd_hessian;
using bnc::testing::random_point;

namespace {
constexpr int N = 7;
}

TEST_CASE("mock background reproduces the boundary data exactly") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N - 1, N - 1);
  A(0, 0) = 2.0;
  A(1, 1) = 0.5;
  U0Field u0 = mock_u0(N, -1.0, A, 1.0);

  CHECK(u0.s0 == -1.0);
  CHECK(u0.A_positive_definite);

  // finite-difference tangential Hessian of the outward-normal derivative
  auto normal_deriv = [&](const Vec& xp) {
    Vec x = Vec::Zero(N);
    x.head(N - 1) = xp;
    return -u0.gradient(x)[N - 1];  // nu_out = -e_N
  };
  Vec zero = Vec::Zero(N - 1);
  CHECK(std::abs(normal_deriv(zero) - u0.s0) <= 1e-12);
  Eigen::MatrixXd H = fd_hessian(normal_deriv, zero, 1e-3);
  CHECK((H - A).norm() <= 1e-6 * A.norm());
  Vec g = fd_gradient(normal_deriv, zero);
  CHECK(g.norm() <= 1e-9);
}

TEST_CASE("mock background: positivity near the base point, zero trace") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N - 1, N - 1);
  U0Field u0 = mock_u0(N, -1.0, A, 1.0);
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    Vec x = 0.3 * random_point(rng, N, 1.0);
    x[N - 1] = 1e-4 + 0.0999 * rng.uniform();
    CHECK(u0.value(x) > 0.0);
    Vec xb = x;
    xb[N - 1] = 0.0;
    CHECK(u0.value(xb) == 0.0);
  }
}

TEST_CASE("mock background rejects bad hypotheses") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N - 1, N - 1);
  CHECK_THROWS_AS(mock_u0(N, +1.0, A, 1.0), std::invalid_argument);
  Eigen::MatrixXd indef = A;
  indef(0, 0) = -1.0;
  CHECK_THROWS_AS(mock_u0(N, -1.0, indef, 1.0), std::invalid_argument);
  Eigen::MatrixXd nonsym = A;
  nonsym(0, 1) = 0.3;
  CHECK_THROWS_AS(mock_u0(N, -1.0, nonsym, 1.0), std::invalid_argument);
}

TEST_CASE("mock background gradient matches finite differences through the cutoff") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N - 1, N - 1);
  A(2, 2) = 1.7;
  U0Field u0 = mock_u0(N, -0.8, A, 1.0);
  Rng rng(123);
  for (int trial = 0; trial < 40; ++trial) {
    // cover the plateau, the transition shell |x| in (0.5, 1), and outside
    Vec x = random_point(rng, N, 0.45);
    x[N - 1] = 0.05 + 0.6 * rng.uniform();
    Vec g = u0.gradient(x);
    Vec gfd = fd_gradient([&](const Vec& z) { return u0.value(z); }, x, 5e-4);
    CHECK((g - gfd).norm() <= 1e-6 * (g.norm() + 1.0));
  }
}

TEST_CASE("annulus shooting: positive profile with a single interior maximum") {
  ShootingResult sr = shoot_annulus_u0(1.0, 2.0, N, 1e-10);
  CHECK(sr.end_value <= 1e-10);
  CHECK(sr.u.front() == 0.0);
  CHECK(sr.slope > 0.0);
  CHECK(sr.deriv_b < 0.0);

  int sign_changes = 0;
  bool positive_inside = true;
  for (std::size_t i = 1; i + 1 < sr.r.size(); ++i) {
    if (sr.u[i] <= 0.0) positive_inside = false;
    if (sr.v[i] * sr.v[i - 1] < 0.0) ++sign_changes;
  }
  CHECK(positive_inside);
  CHECK(sign_changes == 1);  // u' changes sign exactly once: one maximum
  CHECK(sr.profile_error <= 1e-8);
}

TEST_CASE("annulus shooting: slope is stable under tolerance tightening") {
  ShootingResult coarse = shoot_annulus_u0(1.0, 2.0, N, 1e-8);
  ShootingResult fine = shoot_annulus_u0(1.0, 2.0, N, 5e-9);
  CHECK(std::abs(coarse.slope - fine.slope) <= 10.0 * 1e-8);
}

TEST_CASE("annulus field: values, gradient, and boundary data") {
  ShootingResult sr = shoot_annulus_u0(1.0, 2.0, N, 1e-10);
  U0Field u0 = annulus_u0_field(sr);
  CHECK(u0.s0 < 0.0);
  CHECK(u0.s0 == sr.deriv_b);
  CHECK(!u0.A_positive_definite);  // rotational symmetry: zero Hessian
  CHECK(u0.A.norm() == 0.0);

  Vec x = Vec::Zero(N);
  x[0] = 1.5;
  CHECK(u0.value(x) > 0.0);
  Vec g = u0.gradient(x);
  Vec gfd = fd_gradient([&](const Vec& z) { return u0.value(z); }, x, 1e-3);
  CHECK((g - gfd).norm() <= 1e-5 * (g.norm() + 1.0));

  x[0] = 0.5;  // outside the annulus
  CHECK(u0.value(x) == 0.0);
  x[0] = 2.5;
  CHECK(u0.value(x) == 0.0);
}

TEST_CASE("shooting guards") {
  CHECK_THROWS_AS(shoot_annulus_u0(2.0, 1.0, N, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(shoot_annulus_u0(1.0, 2.0, 6, 1e-10), std::invalid_argument);
}
