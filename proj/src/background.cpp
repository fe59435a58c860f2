#include "bncluster/background.hpp"

#include <algorithm>
#include <cmath>

#include "bncluster/bubbles.hpp"

namespace bnc {
namespace {

// C^inf bump: 1 on [0, c/2], 0 on [c, inf).
struct Bump {
  double c;
  static double f(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
  static double fp(double t) {
    return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0;
  }
  double value(double rho) const {
    if (rho <= 0.5 * c) return 1.0;
    if (rho >= c) return 0.0;
    double s = (2.0 * rho - c) / c;  // in (0,1)
    return f(1.0 - s) / (f(1.0 - s) + f(s));
  }
  double deriv(double rho) const {
    if (rho <= 0.5 * c || rho >= c) return 0.0;
    double s = (2.0 * rho - c) / c;
    double a = f(1.0 - s), b = f(s);
    double ap = fp(1.0 - s), bp = fp(s);
    double dchids = (-ap * b - a * bp) / ((a + b) * (a + b));
    return dchids * 2.0 / c;
  }
};

}  // namespace

U0Field mock_u0(int dim, double s0, const Eigen::MatrixXd& A, double cutoff) {
  if (!(s0 < 0.0))
    throw std::invalid_argument("mock_u0: s0 must be negative (Hopf sign)");
  if (A.rows() != dim - 1 || A.cols() != dim - 1)
    throw std::invalid_argument("mock_u0: A must be (dim-1) x (dim-1)");
  if (!A.isApprox(A.transpose(), 1e-12))
    throw std::invalid_argument("mock_u0: A must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("mock_u0: A must be positive definite");
  if (!(cutoff > 0.0)) throw std::invalid_argument("mock_u0: cutoff must be positive");

  const Bump chi{cutoff};
  Eigen::MatrixXd Acopy = A;
  const int n = dim;

  U0Field field;
  field.dim = dim;
  field.s0 = s0;
  field.A = A;
  field.A_positive_definite = true;

  auto q_of = [Acopy, s0, n](const Vec& x) {
    const auto xp = x.head(n - 1);
    return -s0 - 0.5 * xp.dot(Acopy * xp);
  };

  field.value = [q_of, chi, n](const Vec& x) {
    return x[n - 1] * q_of(x) * chi.value(x.norm());
  };

  field.gradient = [Acopy, q_of, chi, n](const Vec& x) {
    const double rho = x.norm();
    const double cv = chi.value(rho);
    const double cd = chi.deriv(rho);
    const double q = q_of(x);
    const double xn = x[n - 1];
    Vec g = Vec::Zero(n);
    if (cv == 0.0 && cd == 0.0) return g;
    Eigen::VectorXd dq = -(Acopy * x.head(n - 1));
    for (int j = 0; j + 1 < n; ++j) g[j] = xn * dq[j] * cv;
    g[n - 1] = q * cv;
    if (cd != 0.0 && rho > 0.0) {
      const double radial = xn * q * cd / rho;
      g += radial * x;
    }
    return g;
  };
  return field;
}

namespace {

struct OdeState {
  double u, v;
};

// u'' = -(N-1)/r u' - |u|^{p-1} u
inline OdeState rhs(int dim, double p, double r, const OdeState& s) {
  double nonlin = std::pow(std::abs(s.u), p - 1.0) * s.u;
  return {s.v, -(dim - 1) / r * s.v - nonlin};
}

struct Trace {
  std::vector<double> r, u, v, acc;
};

// Dormand-Prince 5(4) with step control; optionally records the profile.
OdeState integrate(int dim, double p, double a, double b, double m,
                   double tol, Trace* trace) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 35.0 / 384 - 5179.0 / 57600,
                      e3 = 500.0 / 1113 - 7571.0 / 16695,
                      e4 = 125.0 / 192 - 393.0 / 640,
                      e5 = -2187.0 / 6784 + 92097.0 / 339200,
                      e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  OdeState s{0.0, m};
  double r = a;
  double h = (b - a) / 64.0;
  if (trace) {
    OdeState k = rhs(dim, p, r, s);
    trace->r.push_back(r);
    trace->u.push_back(s.u);
    trace->v.push_back(s.v);
    trace->acc.push_back(k.v);
  }
  while (r < b) {
    h = std::min(h, b - r);
    OdeState k1 = rhs(dim, p, r, s);
    OdeState y2{s.u + h * a21 * k1.u, s.v + h * a21 * k1.v};
    OdeState k2 = rhs(dim, p, r + c2 * h, y2);
    OdeState y3{s.u + h * (a31 * k1.u + a32 * k2.u),
                s.v + h * (a31 * k1.v + a32 * k2.v)};
    OdeState k3 = rhs(dim, p, r + c3 * h, y3);
    OdeState y4{s.u + h * (a41 * k1.u + a42 * k2.u + a43 * k3.u),
                s.v + h * (a41 * k1.v + a42 * k2.v + a43 * k3.v)};
    OdeState k4 = rhs(dim, p, r + c4 * h, y4);
    OdeState y5{s.u + h * (a51 * k1.u + a52 * k2.u + a53 * k3.u + a54 * k4.u),
                s.v + h * (a51 * k1.v + a52 * k2.v + a53 * k3.v + a54 * k4.v)};
    OdeState k5 = rhs(dim, p, r + c5 * h, y5);
    OdeState y6{
        s.u + h * (a61 * k1.u + a62 * k2.u + a63 * k3.u + a64 * k4.u + a65 * k5.u),
        s.v + h * (a61 * k1.v + a62 * k2.v + a63 * k3.v + a64 * k4.v + a65 * k5.v)};
    OdeState k6 = rhs(dim, p, r + h, y6);
    OdeState y7{s.u + h * (b1 * k1.u + b3 * k3.u + b4 * k4.u + b5 * k5.u + b6 * k6.u),
                s.v + h * (b1 * k1.v + b3 * k3.v + b4 * k4.v + b5 * k5.v + b6 * k6.v)};
    OdeState k7 = rhs(dim, p, r + h, y7);

    double err_u = h * (e1 * k1.u + e3 * k3.u + e4 * k4.u + e5 * k5.u +
                        e6 * k6.u + e7 * k7.u);
    double err_v = h * (e1 * k1.v + e3 * k3.v + e4 * k4.v + e5 * k5.v +
                        e6 * k6.v + e7 * k7.v);
    double scale = tol * (1.0 + std::abs(s.u) + std::abs(s.v));
    double err = std::max(std::abs(err_u), std::abs(err_v)) / scale;
    if (err <= 1.0) {
      r += h;
      s = y7;
      if (trace) {
        trace->r.push_back(r);
        trace->u.push_back(s.u);
        trace->v.push_back(s.v);
        trace->acc.push_back(k7.v);
      }
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
  }
  return s;
}

}  // namespace

ShootingResult shoot_annulus_u0(double a, double b, int dim, double tol) {
  if (!(0.0 < a && a < b)) throw std::invalid_argument("shoot: need 0 < a < b");
  if (dim < 7) throw std::invalid_argument("shoot: dim must be >= 7");
  const double p = critical_p(dim);
  const double ode_tol = 1e-12;

  auto end_u = [&](double m) { return integrate(dim, p, a, b, m, ode_tol, nullptr).u; };

  // small slopes stay positive through r = b; large ones cross before it
  double lo = 1e-3, hi = lo;
  double f_lo = end_u(lo);
  if (f_lo <= 0.0) {
    // even the smallest scanned slope crosses early; walk down
    while (lo > 1e-12 && end_u(lo) <= 0.0) lo *= 0.5;
    f_lo = end_u(lo);
  }
  bool bracketed = false;
  for (hi = std::max(2.0 * lo, 1.0); hi <= 1e8; hi *= 2.0) {
    if (end_u(hi) < 0.0) {
      bracketed = true;
      break;
    }
  }
  if (!bracketed || f_lo <= 0.0)
    throw std::runtime_error(
        "shoot_annulus_u0: no sign change of u(b) for slopes in [" +
        std::to_string(lo) + ", 1e8]");

  double m_lo = lo, m_hi = hi;
  double m = 0.5 * (m_lo + m_hi);
  for (int it = 0; it < 200; ++it) {
    m = 0.5 * (m_lo + m_hi);
    double f = end_u(m);
    if (std::abs(f) <= tol && (m_hi - m_lo) <= 1e-14 * m) break;
    (f > 0.0 ? m_lo : m_hi) = m;
  }

  ShootingResult out;
  out.a = a;
  out.b = b;
  out.dim = dim;
  out.slope = m;
  Trace tr;
  OdeState fin = integrate(dim, p, a, b, m, ode_tol, &tr);
  out.r = std::move(tr.r);
  out.u = std::move(tr.u);
  out.v = std::move(tr.v);
  out.acc = std::move(tr.acc);
  out.deriv_a = m;
  out.deriv_b = fin.v;
  out.end_value = std::abs(fin.u);

  // step-doubling style error estimate: rerun at tighter tolerance and
  // compare the endpoint states plus a mid sample
  OdeState fin2 = integrate(dim, p, a, b, m, ode_tol * 1e-2, nullptr);
  OdeState mid1 = integrate(dim, p, a, 0.5 * (a + b), m, ode_tol, nullptr);
  OdeState mid2 = integrate(dim, p, a, 0.5 * (a + b), m, ode_tol * 1e-2, nullptr);
  out.profile_error = std::max(std::abs(fin.u - fin2.u),
                               std::abs(mid1.u - mid2.u));
  return out;
}

U0Field annulus_u0_field(const ShootingResult& sr) {
  const int n = sr.dim;
  U0Field field;
  field.dim = n;
  field.s0 = sr.deriv_b;  // outward-normal derivative on the outer sphere
  field.A = Eigen::MatrixXd::Zero(n - 1, n - 1);
  field.A_positive_definite = false;

  auto locate = [sr](double r) {
    auto it = std::upper_bound(sr.r.begin(), sr.r.end(), r);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
        1, std::min<std::ptrdiff_t>(it - sr.r.begin(),
                                    static_cast<std::ptrdiff_t>(sr.r.size()) - 1)));
    return i;
  };

  // cubic Hermite on (u, v) for values, on (v, acc) for derivatives
  auto hermite = [](double x0, double x1, double f0, double f1, double d0,
                    double d1, double x) {
    double h = x1 - x0;
    double t = (x - x0) / h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
  };

  ShootingResult prof = sr;  // owned copy for the closures
  field.value = [prof, locate, hermite](const Vec& x) {
    double r = x.norm();
    if (r <= prof.a || r >= prof.b) return 0.0;
    auto i = locate(r);
    return hermite(prof.r[i - 1], prof.r[i], prof.u[i - 1], prof.u[i],
                   prof.v[i - 1], prof.v[i], r);
  };
  field.gradient = [prof, locate, hermite, n](const Vec& x) {
    double r = x.norm();
    Vec g = Vec::Zero(n);
    if (r <= prof.a || r >= prof.b || r == 0.0) return g;
    auto i = locate(r);
    double du = hermite(prof.r[i - 1], prof.r[i], prof.v[i - 1], prof.v[i],
                        prof.acc[i - 1], prof.acc[i], r);
    g = (du / r) * x;
    return g;
  };
  return field;
}

}  // namespace bnc
