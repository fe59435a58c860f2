#pragma once

// Test-only finite-difference oracles, independent of the library's
// analytic derivative paths. Richardson-extrapolated central differences
// with the h pair {1e-3, 5e-4}.

#include <functional>

#include "bncluster/rng.hpp"
#include "bncluster/types.hpp"

namespace bnc::testing {

template <class F, class VecT>
double fd_partial(const F& f, const VecT& x, int i, double h = 1e-3) {
  auto central = [&](double step) {
    VecT xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    return (f(xp) - f(xm)) / (2.0 * step);
  };
  double d1 = central(h);
  double d2 = central(0.5 * h);
  return (4.0 * d2 - d1) / 3.0;
}

template <class F, class VecT>
VecT fd_gradient(const F& f, const VecT& x, double h = 1e-3) {
  VecT g(x.size());
  for (int i = 0; i < x.size(); ++i) g[i] = fd_partial(f, x, i, h);
  return g;
}

template <class F, class VecT>
double fd_laplacian(const F& f, const VecT& x, double h = 1e-3) {
  auto second_sum = [&](double step) {
    double acc = 0.0;
    double f0 = f(x);
    for (int i = 0; i < x.size(); ++i) {
      VecT xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      acc += (f(xp) - 2.0 * f0 + f(xm)) / (step * step);
    }
    return acc;
  };
  double l1 = second_sum(h);
  double l2 = second_sum(0.5 * h);
  return (4.0 * l2 - l1) / 3.0;
}

/// Hessian of a scalar function by second differences.
template <class F, class VecT>
Eigen::MatrixXd fd_hessian(const F& f, const VecT& x, double h = 1e-3) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H(n, n);
  double f0 = f(x);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v;
      if (i == j) {
        VecT xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        v = (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
      } else {
        VecT xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += h; xpp[j] += h;
        xpm[i] += h; xpm[j] -= h;
        xmp[i] -= h; xmp[j] += h;
        xmm[i] -= h; xmm[j] -= h;
        v = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
      }
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

inline Vec random_point(Rng& rng, int dim, double radius) {
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = radius * (2.0 * rng.uniform() - 1.0);
  return x;
}

}  // namespace bnc::testing
