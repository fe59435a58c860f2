#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "bncluster/bubbles.hpp"
#include "bncluster/geometry.hpp"
#include "bncluster/types.hpp"

namespace bnc {

/// Exact rational on int64, just enough for the exponent ladder.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d = 1) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw std::invalid_argument("rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  friend Rational operator+(Rational a, Rational b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(Rational a, Rational b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(Rational a, Rational b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend Rational operator/(Rational a, Rational b) {
    if (b.num == 0) throw std::invalid_argument("rational: division by zero");
    return Rational(a.num * b.den, a.den * b.num);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num * b.den < b.num * a.den;
  }
  double to_double() const { return static_cast<double>(num) / den; }
  std::string str() const {
    return den == 1 ? std::to_string(num)
                    : std::to_string(num) + "/" + std::to_string(den);
  }
};

/// The two-scale rate ladder. All entries exact rationals; the theta
/// identities hold exactly by construction and are re-checked here.
struct ExponentLadder {
  int dim = 0;
  Rational alpha, beta, alpha_hat, beta_hat, beta_tilde, theta, theta_hat;
};

/// Throws for dim <= 5 (denominator regime); dims 6..12 supported.
ExponentLadder exponent_ladder(int dim);

struct FirstScalePoint {
  double d0 = 0, t0 = 0, s0 = 0;
  // residuals of the critical-point system, in C-normalized form (the
  // raw equations carry the size of C ~ 1e4, putting 1e-12 below the
  // double rounding floor; the normalized form is the meaningful one)
  double res1 = 0, res2 = 0;
  double raw1 = 0, raw2 = 0;
};

/// First-scale reduced energy
///   Psi(d,t) = -C s0 d^{(N-2)/2} t + alpha_N/2^{N-1} C d^{N-2}/t^{N-2} - B d^2.
double first_scale_energy(double d, double t, double s0,
                          const UniversalConstants& uc);

/// Analytic gradient of Psi, for cross-checking against finite differences.
Eigen::Vector2d first_scale_energy_grad(double d, double t, double s0,
                                        const UniversalConstants& uc);

/// Solves grad Psi = 0: t0 is eliminated through the t-equation,
///   t0 = [ (N-2) alpha_N d0^{(N-2)/2} / (2^{N-1} |s0|) ]^{1/(N-1)},
/// then the d-equation is solved by bracketed Newton. Requires s0 < 0.
FirstScalePoint solve_first_scale(double s0, const UniversalConstants& uc);

/// Second-order coefficients of the reduced expansion around (d0,t0).
/// frak_A and frak_C are the half-Hessian entries of Psi; frak_B is the
/// mixed derivative. A conventional simplification drops frak_B as zero
/// through the t-equation, but the substitution actually leaves
///   -alpha_N (N-2)^2 C d0^{N-3} / (2^N t0^{N-1}) != 0;
/// both the direct value and this reduction are kept, and the
/// discrepancy is surfaced in reports rather than resolved.
struct SecondScaleCoeffs {
  double frak_A = 0;          // 1/2 d^2Psi/dd^2
  double frak_A_sub = 0;      // same, rewritten through the d-equation
  double frak_B = 0;          // d^2Psi/dd dt (nonzero)
  double frak_B_reduced = 0;  // closed form after the t-equation
  double frak_C = 0;          // 1/2 d^2Psi/dt^2
  double g0 = 0;              // Psi(d0, t0), the zero-order bracket
  // legacy variants of frak_A sometimes quoted alongside: one drops a
  // factor (N-2) in the d-equation's Green term and doubles the
  // quadratic coupling coefficient; reported for auditing only
  double frak_A_legacy = 0;
  double frak_A_legacy_sub = 0;
};

SecondScaleCoeffs second_scale_coeffs(const FirstScalePoint& fp,
                                      const UniversalConstants& uc);

/// Full two-scale parameter pack.
struct ClusterParams {
  double eps = 0;
  int k = 1;
  FirstScalePoint first;
  std::vector<double> d, t;   // k entries each
  std::vector<Vec> tau;       // k vectors in R^{N-1}
  BoundaryChart chart;
  double box_a = 10.0;        // |d_i|, |t_i| < box_a
  double sep_rho = 1e-3;      // |tau_i - tau_h| > sep_rho

  void validate() const;
};

/// Second-scale reduced energy
///   Phi = A sum d_i^2 + C sum t_i^2
///         - alpha_N C sum_{h<i} d0^{N-2}/|tau_i-tau_h|^{N-2}
///         - (C/2) d0^{(N-2)/2} t0 sum <A tau_i, tau_i>
///         [+ frak_B sum d_i t_i when the coupling toggle is on].
double second_scale_energy(const std::vector<double>& d,
                           const std::vector<double>& t,
                           const std::vector<Vec>& tau,
                           const SecondScaleCoeffs& coeffs,
                           const Eigen::MatrixXd& A,
                           const FirstScalePoint& fp,
                           const UniversalConstants& uc, bool b_term);

/// Gradient of Phi in the flattened order (d_1..d_k, t_1..t_k, tau_1..tau_k).
Eigen::VectorXd second_scale_energy_grad(const std::vector<double>& d,
                                         const std::vector<double>& t,
                                         const std::vector<Vec>& tau,
                                         const SecondScaleCoeffs& coeffs,
                                         const Eigen::MatrixXd& A,
                                         const FirstScalePoint& fp,
                                         const UniversalConstants& uc,
                                         bool b_term);

struct ClusterOptResult {
  std::vector<Vec> tau;        // minimizer, lexicographically sorted
  double G = 0;                // trap energy at tau*
  double grad_norm = 0;
  Eigen::VectorXd hessian_eigenvalues;
  int null_modes = 0;          // |lambda| <= tol * max eigenvalue
  Vec center_of_mass;
  int starts = 0;
};

/// Minimizes the configuration trap energy
///   G(tau) = alpha_N C sum_{h<i} d0^{N-2}/|tau_i-tau_h|^{N-2}
///            + (C/2) d0^{(N-2)/2} t0 sum <A tau_i, tau_i>
/// (the negated tau-part of Phi) by multistart descent with Newton
/// polish. Deterministic for a given seed: starts are seeded per index
/// and ties break by value then lexicographic order.
ClusterOptResult optimize_cluster(int k, const Eigen::MatrixXd& A,
                                  const FirstScalePoint& fp,
                                  const UniversalConstants& uc,
                                  std::uint64_t seed);

struct AssembledCluster {
  std::vector<double> delta;
  std::vector<Vec> xi;
  std::vector<double> boundary_dist;
};

/// Concrete (delta_i, xi_i) for a parameter pack:
///   delta_i = eps^alpha d0 + eps^alpha_hat d_i,
///   xi_hat_i = chart point over eps^beta_hat tau_i,
///   xi_i = xi_hat_i + (eps^beta t0 + eps^beta_tilde t_i) * inward normal.
/// Throws if any delta_i <= 0 or xi_i leaves the domain.
AssembledCluster assemble_cluster(const ClusterParams& params,
                                  const ExponentLadder& ladder);

}  // namespace bnc
