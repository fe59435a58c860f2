#pragma once

#include <functional>

namespace bnc {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;   // estimated absolute error
  int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (G7,K15) on [a,b] with bisection until the
/// summed K15-G7 error estimate meets abs_tol.
QuadResult integrate_gk(const std::function<double(double)>& f, double a,
                        double b, double abs_tol = 1e-13, int max_depth = 48);

}  // namespace bnc
