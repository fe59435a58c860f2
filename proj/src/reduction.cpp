#include "bncluster/reduction.hpp"

#include <algorithm>
#include <cmath>

#include "bncluster/rng.hpp"

namespace bnc {

ExponentLadder exponent_ladder(int dim) {
  if (dim <= 5)
    throw std::domain_error(
        "exponent_ladder: denominator N^2-6N+4 regime requires dim >= 6");
  const long long n = dim;
  const long long den = n * n - 6 * n + 4;
  ExponentLadder L;
  L.dim = dim;
  L.alpha = Rational(2 * (n - 1), den);
  L.beta = Rational(n - 2, den);
  L.alpha_hat = Rational(3 * n * n - 6 * n + 4, n * den);
  L.beta_hat = Rational((n - 2) * (n - 2), n * den);
  L.beta_tilde = Rational(2 * n * n - 6 * n + 4, n * den);
  L.theta = Rational(1) + Rational(2) * L.alpha;
  L.theta_hat = Rational(1) + Rational(2) * L.alpha_hat;

  // ladder identities, exact
  if (!(L.theta == (L.alpha - L.beta) * Rational(n - 2)))
    throw std::logic_error("exponent_ladder: theta identity failed");
  if (!(L.theta_hat == (L.alpha - L.beta_hat) * Rational(n - 2)))
    throw std::logic_error("exponent_ladder: theta_hat identity failed");
  if (!(L.alpha < L.alpha_hat) || !(L.beta_hat < L.beta) ||
      !(L.beta < L.beta_tilde))
    throw std::logic_error("exponent_ladder: ordering failed");
  return L;
}

double first_scale_energy(double d, double t, double s0,
                          const UniversalConstants& uc) {
  const int n = uc.dim;
  return -uc.C_const * s0 * pow_half(d, n - 2) * t +
         uc.alpha_N / pow_half(2.0, 2 * (n - 1)) * uc.C_const *
             pow_half(d, 2 * (n - 2)) / pow_half(t, 2 * (n - 2)) -
         uc.B_const * d * d;
}

Eigen::Vector2d first_scale_energy_grad(double d, double t, double s0,
                                        const UniversalConstants& uc) {
  const int n = uc.dim;
  const double C = uc.C_const;
  const double pre = uc.alpha_N / pow_half(2.0, 2 * (n - 1)) * C;
  Eigen::Vector2d g;
  g[0] = -C * s0 * 0.5 * (n - 2) * pow_half(d, n - 4) * t +
         pre * (n - 2) * pow_half(d, 2 * (n - 3)) / pow_half(t, 2 * (n - 2)) -
         2.0 * uc.B_const * d;
  g[1] = -C * s0 * pow_half(d, n - 2) -
         pre * (n - 2) * pow_half(d, 2 * (n - 2)) / pow_half(t, 2 * (n - 1));
  return g;
}

namespace {

double eliminate_t(double d, double s0, const UniversalConstants& uc) {
  const int n = uc.dim;
  return std::pow((n - 2) * uc.alpha_N * pow_half(d, n - 2) /
                      (pow_half(2.0, 2 * (n - 1)) * std::abs(s0)),
                  1.0 / (n - 1));
}

}  // namespace

FirstScalePoint solve_first_scale(double s0, const UniversalConstants& uc) {
  if (!(s0 < 0.0))
    throw std::invalid_argument(
        "solve_first_scale: s0 must be negative (outward Hopf derivative)");
  const int n = uc.dim;
  const double B_over_C = uc.B_const / uc.C_const;
  const double a2 = uc.alpha_N / pow_half(2.0, 2 * (n - 1));  // alpha_N/2^{N-1}

  // d-equation, C-normalized, with t eliminated: f(d) = dPsi/dd / C
  auto f = [&](double d) {
    double t = eliminate_t(d, s0, uc);
    return -2.0 * B_over_C * d +
           a2 * (n - 2) * pow_half(d, 2 * (n - 3)) / pow_half(t, 2 * (n - 2)) -
           0.5 * (n - 2) * pow_half(d, n - 4) * t * s0;
  };
  auto fprime = [&](double d) {
    double t = eliminate_t(d, s0, uc);
    double tp = t * 0.5 * (n - 2) / ((n - 1) * d);  // dt/dd for the eliminated t
    double g = -2.0 * B_over_C;
    g += a2 * (n - 2) *
         ((n - 3) * pow_half(d, 2 * (n - 4)) / pow_half(t, 2 * (n - 2)) -
          (n - 2) * pow_half(d, 2 * (n - 3)) / pow_half(t, 2 * (n - 1)) * tp);
    g += -0.5 * (n - 2) * s0 *
         (0.5 * (n - 4) * pow_half(d, n - 6) * t + pow_half(d, n - 4) * tp);
    return g;
  };

  // bracket the positive root: the -2B d term wins for small d (its
  // exponent 1 is below the collapsed nonlinear exponent), the Green and
  // coupling terms win for large d
  double lo = 1e-8, hi = 1e-8;
  while (lo > 1e-300 && !(f(lo) < 0.0)) lo *= 0.5;
  bool ok = false;
  for (hi = std::max(2.0 * lo, 1e-4); hi < 1e12; hi *= 2.0) {
    if (f(hi) > 0.0) {
      ok = true;
      break;
    }
  }
  if (!ok || !(f(lo) < 0.0))
    throw std::runtime_error(
        "solve_first_scale: no bracket for the d-equation in [1e-8, 1e12]");

  double d = std::sqrt(lo * hi);
  for (int it = 0; it < 200; ++it) {
    double fd = f(d);
    (fd < 0.0 ? lo : hi) = d;
    double step = fd / fprime(d);
    double dn = d - step;
    if (!(dn > lo && dn < hi)) dn = 0.5 * (lo + hi);  // bisection safeguard
    if (std::abs(dn - d) <= 1e-16 * d) {
      d = dn;
      break;
    }
    d = dn;
  }

  FirstScalePoint fp;
  fp.s0 = s0;
  fp.d0 = d;
  fp.t0 = eliminate_t(d, s0, uc);
  fp.res1 = std::abs(f(d));
  // t-equation normalized by C d^{(N-2)/2}
  fp.res2 = std::abs(-a2 * (n - 2) * pow_half(fp.d0, n - 2) /
                         pow_half(fp.t0, 2 * (n - 1)) -
                     s0);
  Eigen::Vector2d raw = first_scale_energy_grad(fp.d0, fp.t0, s0, uc);
  fp.raw1 = raw[0];
  fp.raw2 = raw[1];
  return fp;
}

SecondScaleCoeffs second_scale_coeffs(const FirstScalePoint& fp,
                                      const UniversalConstants& uc) {
  const int n = uc.dim;
  const double C = uc.C_const;
  const double d0 = fp.d0, t0 = fp.t0, s0 = fp.s0;
  const double a2N = uc.alpha_N / pow_half(2.0, 2 * n);  // alpha_N / 2^N
  const double green = pow_half(d0, 2 * (n - 4)) / pow_half(t0, 2 * (n - 2));
  const double coup = pow_half(d0, n - 6) * t0;

  SecondScaleCoeffs sc;
  sc.frak_A = -uc.B_const + a2N * (n - 2) * (n - 3) * green * C -
              C * (n - 2) * (n - 4) / 8.0 * coup * s0;
  sc.frak_A_sub = a2N * (n - 2) * (n - 4) * green * C -
                  C * (n - 2) * (n - 6) / 8.0 * coup * s0;
  sc.frak_A_legacy = -uc.B_const + a2N * (n - 2) * (n - 3) * green * C -
                      C * (n - 2) * (n - 4) / 4.0 * coup * s0;
  sc.frak_A_legacy_sub =
      a2N * (n * n - 5 * n + 5) * green * C -
      C * (n - 2) * (n - 5) / 4.0 * coup * s0;
  sc.frak_B = -2.0 * a2N * (n - 2) * (n - 2) * pow_half(d0, 2 * (n - 3)) /
                  pow_half(t0, 2 * (n - 1)) * C -
              C * (n - 2) / 2.0 * pow_half(d0, n - 4) * s0;
  sc.frak_B_reduced = -a2N * (n - 2) * (n - 2) * C *
                      pow_half(d0, 2 * (n - 3)) / pow_half(t0, 2 * (n - 1));
  sc.frak_C =
      a2N * (n - 2) * (n - 1) * pow_half(d0, 2 * (n - 2)) / pow_half(t0, 2 * n) * C;
  sc.g0 = first_scale_energy(d0, t0, s0, uc);
  return sc;
}

void ClusterParams::validate() const {
  if (k < 1) throw std::invalid_argument("cluster: k must be >= 1");
  if (static_cast<int>(d.size()) != k || static_cast<int>(t.size()) != k ||
      static_cast<int>(tau.size()) != k)
    throw std::invalid_argument("cluster: parameter arrays must have k entries");
  for (int i = 0; i < k; ++i) {
    if (!(std::abs(d[i]) < box_a && std::abs(t[i]) < box_a))
      throw std::invalid_argument("cluster: |d_i|, |t_i| must stay below the box bound");
  }
  for (int i = 0; i < k; ++i)
    for (int h = i + 1; h < k; ++h)
      if (!((tau[i] - tau[h]).norm() > sep_rho))
        throw std::invalid_argument(
            "cluster: tau points closer than the minimum separation rho");
}

namespace {

struct TrapEnergy {
  int k, m;  // m = dim - 1
  double kappa;  // alpha_N C d0^{N-2}
  double conf;   // (C/2) d0^{(N-2)/2} t0
  int n;
  Eigen::MatrixXd A;

  double value(const Eigen::VectorXd& x) const {
    double g = 0.0;
    for (int i = 0; i < k; ++i) {
      auto ti = x.segment(i * m, m);
      g += conf * ti.dot(A * ti);
      for (int h = i + 1; h < k; ++h) {
        double r2 = (ti - x.segment(h * m, m)).squaredNorm();
        g += kappa / pow_half(r2, n - 2);
      }
    }
    return g;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(k * m);
    for (int i = 0; i < k; ++i) {
      auto ti = x.segment(i * m, m);
      g.segment(i * m, m) += 2.0 * conf * (A * ti);
      for (int h = i + 1; h < k; ++h) {
        Eigen::VectorXd dvec = ti - x.segment(h * m, m);
        double r2 = dvec.squaredNorm();
        Eigen::VectorXd f = -(n - 2) * kappa * pow_half(r2, -n) * dvec;
        g.segment(i * m, m) += f;
        g.segment(h * m, m) -= f;
      }
    }
    return g;
  }

  Eigen::MatrixXd hess(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k * m, k * m);
    for (int i = 0; i < k; ++i) {
      H.block(i * m, i * m, m, m) += 2.0 * conf * A;
      for (int h = i + 1; h < k; ++h) {
        Eigen::VectorXd dvec = x.segment(i * m, m) - x.segment(h * m, m);
        double r2 = dvec.squaredNorm();
        Eigen::MatrixXd blk =
            (n - 2) * kappa *
            (n * pow_half(r2, -(n + 2)) * (dvec * dvec.transpose()) -
             pow_half(r2, -n) * Eigen::MatrixXd::Identity(m, m));
        H.block(i * m, i * m, m, m) += blk;
        H.block(h * m, h * m, m, m) += blk;
        H.block(i * m, h * m, m, m) -= blk;
        H.block(h * m, i * m, m, m) -= blk;
      }
    }
    return H;
  }

  double min_sep(const Eigen::VectorXd& x) const {
    double s = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i)
      for (int h = i + 1; h < k; ++h)
        s = std::min(s, (x.segment(i * m, m) - x.segment(h * m, m)).norm());
    return s;
  }
};

bool lex_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - 1e-14) return true;
    if (a[i] > b[i] + 1e-14) return false;
  }
  return false;
}

}  // namespace

double second_scale_energy(const std::vector<double>& d,
                           const std::vector<double>& t,
                           const std::vector<Vec>& tau,
                           const SecondScaleCoeffs& coeffs,
                           const Eigen::MatrixXd& A,
                           const FirstScalePoint& fp,
                           const UniversalConstants& uc, bool b_term) {
  const int n = uc.dim;
  const int k = static_cast<int>(d.size());
  for (std::size_t i = 0; i < tau.size(); ++i)
    for (std::size_t h = i + 1; h < tau.size(); ++h)
      if (!((tau[i] - tau[h]).norm() > 1e-12))
        throw std::invalid_argument("second_scale_energy: coincident tau points");
  double phi = 0.0;
  for (int i = 0; i < k; ++i) {
    phi += coeffs.frak_A * d[i] * d[i] + coeffs.frak_C * t[i] * t[i];
    if (b_term) phi += coeffs.frak_B * d[i] * t[i];
    phi -= 0.5 * uc.C_const * pow_half(fp.d0, n - 2) * fp.t0 *
           tau[i].dot(A * tau[i]);
  }
  const double kappa = uc.alpha_N * uc.C_const * pow_half(fp.d0, 2 * (n - 2));
  for (int i = 0; i < k; ++i)
    for (int h = i + 1; h < k; ++h)
      phi -= kappa / pow_half((tau[i] - tau[h]).squaredNorm(), n - 2);
  return phi;
}

Eigen::VectorXd second_scale_energy_grad(const std::vector<double>& d,
                                         const std::vector<double>& t,
                                         const std::vector<Vec>& tau,
                                         const SecondScaleCoeffs& coeffs,
                                         const Eigen::MatrixXd& A,
                                         const FirstScalePoint& fp,
                                         const UniversalConstants& uc,
                                         bool b_term) {
  const int n = uc.dim;
  const int k = static_cast<int>(d.size());
  const int m = n - 1;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * k + k * m);
  const double kappa = uc.alpha_N * uc.C_const * pow_half(fp.d0, 2 * (n - 2));
  const double conf = 0.5 * uc.C_const * pow_half(fp.d0, n - 2) * fp.t0;
  for (int i = 0; i < k; ++i) {
    g[i] = 2.0 * coeffs.frak_A * d[i] + (b_term ? coeffs.frak_B * t[i] : 0.0);
    g[k + i] = 2.0 * coeffs.frak_C * t[i] + (b_term ? coeffs.frak_B * d[i] : 0.0);
    Eigen::VectorXd gi = -2.0 * conf * (A * tau[i]);
    for (int h = 0; h < k; ++h) {
      if (h == i) continue;
      Vec dvec = tau[i] - tau[h];
      double r2 = dvec.squaredNorm();
      gi += (n - 2) * kappa * pow_half(r2, -n) * dvec;
    }
    g.segment(2 * k + i * m, m) = gi;
  }
  return g;
}

ClusterOptResult optimize_cluster(int k, const Eigen::MatrixXd& A,
                                  const FirstScalePoint& fp,
                                  const UniversalConstants& uc,
                                  std::uint64_t seed) {
  const int n = uc.dim;
  const int m = n - 1;
  if (k < 1) throw std::invalid_argument("optimize_cluster: k must be >= 1");
  if (A.rows() != m || A.cols() != m)
    throw std::invalid_argument("optimize_cluster: A must be (N-1)x(N-1)");
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        "optimize_cluster: A must be positive definite (theorem hypothesis)");

  ClusterOptResult out;
  out.center_of_mass = Vec::Zero(m);
  if (k == 1) {
    out.tau = {Vec::Zero(m)};
    out.G = 0.0;
    out.grad_norm = 0.0;
    out.hessian_eigenvalues = Eigen::VectorXd();
    out.null_modes = 0;
    out.starts = 0;
    return out;
  }

  TrapEnergy trap;
  trap.k = k;
  trap.m = m;
  trap.n = n;
  trap.A = A;
  trap.kappa = uc.alpha_N * uc.C_const * pow_half(fp.d0, 2 * (n - 2));
  trap.conf = 0.5 * uc.C_const * pow_half(fp.d0, n - 2) * fp.t0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> aeig(A);
  const double lam_min = aeig.eigenvalues().minCoeff();
  // balance radius of an antipodal pair in the softest direction
  const double rbar = std::pow(
      (n - 2) * uc.alpha_N * pow_half(fp.d0, n - 2) /
          (pow_half(2.0, 2 * (n - 1)) * fp.t0 * lam_min),
      1.0 / n);
  Eigen::MatrixXd Ainv_half =
      aeig.eigenvectors() *
      aeig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      aeig.eigenvectors().transpose();

  const int starts = std::max(8, 2 * k);
  const double rho = 1e-3;
  Eigen::VectorXd best;
  double best_G = std::numeric_limits<double>::infinity();

  for (int s = 0; s < starts; ++s) {
    Rng rng = Rng::for_block(seed, static_cast<std::uint64_t>(s));
    Eigen::VectorXd x(k * m);
    do {
      for (int i = 0; i < k; ++i) {
        Eigen::VectorXd z(m);
        for (int j = 0; j < m; ++j) z[j] = rng.normal();
        x.segment(i * m, m) = rbar * std::sqrt(lam_min) * (Ainv_half * z);
      }
    } while (trap.min_sep(x) <= rho);

    // descent with backtracking, then damped Newton polish
    double fx = trap.value(x);
    for (int it = 0; it < 500; ++it) {
      Eigen::VectorXd g = trap.grad(x);
      if (g.norm() < 1e-3) break;
      double step = 0.5 * rbar / std::max(g.norm(), 1e-30);
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        Eigen::VectorXd xn = x - step * g;
        if (trap.min_sep(xn) > rho) {
          double fn = trap.value(xn);
          if (fn < fx - 1e-4 * step * g.squaredNorm()) {
            x = xn;
            fx = fn;
            moved = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    for (int it = 0; it < 50; ++it) {
      Eigen::VectorXd g = trap.grad(x);
      if (g.norm() <= 1e-10) break;
      Eigen::MatrixXd H = trap.hess(x);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> he(H);
      double shift = std::max(0.0, 1e-8 * std::abs(he.eigenvalues().maxCoeff()) -
                                       he.eigenvalues().minCoeff());
      Eigen::VectorXd p =
          (H + shift * Eigen::MatrixXd::Identity(k * m, k * m))
              .ldlt()
              .solve(-g);
      if (g.norm() < 1e-4 * (1.0 + std::abs(fx))) {
        // quadratic convergence zone: value comparisons are rounding-bound
        Eigen::VectorXd xn = x + p;
        if (trap.min_sep(xn) > rho) {
          x = xn;
          fx = trap.value(x);
          continue;
        }
      }
      double step = 1.0;
      for (int bt = 0; bt < 60; ++bt) {
        Eigen::VectorXd xn = x + step * p;
        if (trap.min_sep(xn) > rho && trap.value(xn) <= fx) {
          x = xn;
          fx = trap.value(x);
          break;
        }
        step *= 0.5;
      }
    }

    // canonical order for deterministic tie-breaking
    std::vector<Vec> conf_tau(k);
    for (int i = 0; i < k; ++i) conf_tau[i] = x.segment(i * m, m);
    std::sort(conf_tau.begin(), conf_tau.end(), lex_less);
    Eigen::VectorXd xs(k * m);
    for (int i = 0; i < k; ++i) xs.segment(i * m, m) = conf_tau[i];

    double G = trap.value(xs);
    bool take = best.size() == 0;
    if (!take) {
      double tie = 1e-12 * (1.0 + std::abs(best_G));
      take = G < best_G - tie ||
             (std::abs(G - best_G) <= tie &&
              std::lexicographical_compare(xs.data(), xs.data() + xs.size(),
                                           best.data(),
                                           best.data() + best.size()));
    }
    if (take) {
      best_G = G;
      best = xs;
    }
  }

  out.starts = starts;
  out.tau.resize(k);
  for (int i = 0; i < k; ++i) out.tau[i] = best.segment(i * m, m);
  out.G = best_G;
  out.grad_norm = trap.grad(best).norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> he(trap.hess(best));
  out.hessian_eigenvalues = he.eigenvalues();
  const double lmax = out.hessian_eigenvalues.cwiseAbs().maxCoeff();
  out.null_modes = 0;
  for (int i = 0; i < out.hessian_eigenvalues.size(); ++i)
    if (std::abs(out.hessian_eigenvalues[i]) <= 1e-7 * lmax) ++out.null_modes;
  Vec com = Vec::Zero(m);
  for (const auto& ti : out.tau) com += ti;
  out.center_of_mass = com / k;
  if (out.grad_norm > 1e-8)
    throw std::runtime_error("optimize_cluster: polish did not reach the 1e-8 gradient target");
  return out;
}

AssembledCluster assemble_cluster(const ClusterParams& params,
                                  const ExponentLadder& ladder) {
  params.validate();
  const double eps = params.eps;
  if (!(eps > 0.0)) throw std::invalid_argument("assemble_cluster: eps must be positive");
  const auto& fp = params.first;
  AssembledCluster out;
  const double ea = std::pow(eps, ladder.alpha.to_double());
  const double eah = std::pow(eps, ladder.alpha_hat.to_double());
  const double eb = std::pow(eps, ladder.beta.to_double());
  const double ebh = std::pow(eps, ladder.beta_hat.to_double());
  const double ebt = std::pow(eps, ladder.beta_tilde.to_double());

  for (int i = 0; i < params.k; ++i) {
    double delta = ea * fp.d0 + eah * params.d[i];
    if (!(delta > 0.0))
      throw std::domain_error(
          "assemble_cluster: eps too large, delta_i <= 0 (violates the "
          "positive-height condition)");
    Vec xhat = params.chart.boundary_point(ebh * params.tau[i]);
    Vec nu_in = params.chart.inward_normal(xhat);
    double offset = eb * fp.t0 + ebt * params.t[i];
    Vec xi = xhat + offset * nu_in;
    if (!params.chart.domain.contains(xi))
      throw std::domain_error(
          "assemble_cluster: eps too large, xi_i left the domain (violates "
          "the interior-point condition)");
    out.delta.push_back(delta);
    out.xi.push_back(xi);
    out.boundary_dist.push_back(params.chart.domain.boundary_distance(xi));
  }
  for (std::size_t i = 0; i < out.xi.size(); ++i)
    for (std::size_t h = i + 1; h < out.xi.size(); ++h)
      if (!((out.xi[i] - out.xi[h]).norm() > 0.0))
        throw std::domain_error("assemble_cluster: coincident centers");
  return out;
}

}  // namespace bnc
