#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bncluster/background.hpp"
#include "bncluster/geometry.hpp"
#include "bncluster/reduction.hpp"
#include "bncluster/types.hpp"

namespace bnc {

/// Integration region: an axis box or all of R^N (importance-only).
struct Region {
  enum class Kind { Box, AllSpace };
  Kind kind = Kind::Box;
  int dim = 7;
  Vec lo, hi;

  static Region box(const Vec& lo, const Vec& hi);
  static Region all_space(int dim);
  /// The verification box [-L,L]^{N-1} x [0,L] inside the half-space.
  static Region half_space_box(int dim, double L);

  bool inside(const Vec& x) const;
  double volume() const;
};

/// Mixture importance density: radial kernels (1+|y|^2)^{-b} of scale
/// `scale` around each center (b = twice_b/2 > N/2), plus an optional
/// uniform floor over the box.
struct Importance {
  struct Kernel {
    Vec center;
    double scale = 1.0;
    int twice_b = 0;
    double weight = 0.0;
  };
  std::vector<Kernel> kernels;
  double uniform_weight = 0.0;
};

/// Kernels matched to a family of bubbles; twice_b picks the shape
/// (2N for the U^{2*} profile, N+2 for U^p, 2(N-2) for U^2).
Importance bubble_importance(const std::vector<Bubble>& bubbles, int twice_b,
                             double uniform_floor);

struct McResult {
  double value = 0;
  double std_error = 0;
  long long samples = 0;
  bool suspect = false;          // integrability heuristic tripped
  double max_weight_share = 0;   // largest single-sample variance share
};

/// Unbiased estimate of the integral of f over the region; reproducible
/// for a given (seed, samples, block_size): blocks own derived RNG
/// streams and reduce in index order with compensated sums.
McResult mc_integral(const std::function<double(const Vec&)>& f,
                     const Region& region, const Importance& imp,
                     long long samples, std::uint64_t seed,
                     long long block_size = 1 << 16);

struct RatioResult {
  double ratio = 0;
  double std_error = 0;     // on the ratio
  double reference = 0;     // the closed-form denominator
  McResult raw;
  std::string warning;
};

/// int U_i^{2*-1} U_h  vs  alpha_N C (delta_i delta_h)^{(N-2)/2} / |xi_i-xi_h|^{N-2}.
RatioResult interaction_ratio(const Bubble& bi, const Bubble& bh,
                              const Region& region,
                              const UniversalConstants& uc, long long samples,
                              std::uint64_t seed, long long block_size = 1 << 16);

/// int u0 U^{2*-1}  vs  C delta^{(N-2)/2} u0(xi).
RatioResult u0_coupling_ratio(const Bubble& b, const U0Field& u0,
                              const Region& region,
                              const UniversalConstants& uc, long long samples,
                              std::uint64_t seed, long long block_size = 1 << 16);

/// int U^{2*-1} phi_approx  vs  alpha_N delta^{N-2} H(xi,xi) C.
RatioResult self_h_ratio(const ProjectedBubble& pb, const Region& region,
                         const UniversalConstants& uc, long long samples,
                         std::uint64_t seed, long long block_size = 1 << 16);

/// (eps/2) int U^2  vs  eps delta^2 B.
RatioResult l2_mass_ratio(const Bubble& b, double eps, const Region& region,
                          const UniversalConstants& uc, long long samples,
                          std::uint64_t seed, long long block_size = 1 << 16);

/// The cluster ansatz W = u0 - sum_i PU_i (raw bubbles if projected=false).
struct AnsatzField {
  int dim = 7;
  double eps = 0;
  std::optional<U0Field> u0;
  std::vector<ProjectedBubble> bubbles;
  bool projected = true;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
};

struct EnergyResult {
  double value = 0;
  double std_error = 0;
  bool tol_failed = false;
  McResult grad_part, pow_part, sq_part;
};

/// J_eps(W) = 1/2 int |grad W|^2 - 1/(p+1) int |W|^{p+1} - eps/2 int W^2,
/// stratified: matched bubble kernels for each part, uniform floor on
/// boxes. If the combined standard error exceeds `tol`, the result is
/// returned with tol_failed set rather than silently accepted.
EnergyResult energy_value(const AnsatzField& field, const Region& region,
                          const UniversalConstants& uc, long long samples,
                          std::uint64_t seed, double tol = 1e30,
                          long long block_size = 1 << 16);

struct NormResult {
  double value = 0;
  double std_error = 0;
  McResult raw;
};

/// L^{2N/(N+2)} norm of the bubble-driven residual of W:
///   r = [Delta W + |W|^{p-1}W + eps W] - [Delta u0 + |u0|^{p-1}u0 + eps u0]
///     = f(W) - f(u0) + sum_i f(U_i) + eps (W - u0),
/// evaluated in closed form (the projection corrections are harmonic, so
/// Delta PU_i = Delta U_i exactly). Subtracting the background's own
/// defect keeps the measurement meaningful for providers that do not
/// solve the limit equation exactly, and removes the O(eps) background
/// response that would otherwise mask the bubble error scale.
NormResult residual_norm(const AnsatzField& field, const Region& region,
                         const UniversalConstants& uc, long long samples,
                         std::uint64_t seed, long long block_size = 1 << 16);

struct TermValue {
  std::string name;
  double value = 0, std_error = 0;
  double closed = 0;   // leading closed form at the assembled parameters
  double ratio = 0;    // value / closed
  long long samples = 0;
};

struct SweepPoint {
  double eps = 0;
  std::vector<TermValue> terms;
  double S_mc = 0, S_stderr = 0, S_closed = 0;
  // exact bookkeeping split of S_closed
  double order_zero = 0, order_first = 0, order_second = 0, order_rem = 0;
  double first_residual = 0, first_residual_se = 0;    // (S - zero - second)/eps^theta_hat
  double second_residual = 0, second_residual_se = 0;  // (S - zero - first)/eps^theta_hat
  double phi_prediction = 0;
  double resid_norm = 0, resid_stderr = 0;
  bool dropped = false;
  std::string note;
};

struct SweepConfig {
  int dim = 7;
  double box_L = 1.0;
  double s0 = -1.0;
  Eigen::MatrixXd A;          // defaults to identity
  double cutoff = 1.0;
  int k = 2;
  std::vector<double> eps_grid = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  long long samples = 2'000'000;        // per term integral
  long long resid_samples = 1'000'000;  // residual-norm integral
  std::uint64_t seed = 20260809;
  long long block_size = 1 << 16;
  bool b_term = false;
  std::vector<double> d_offsets, t_offsets;  // defaults: zeros (critical point)
};

struct SweepReport {
  SweepConfig config;
  FirstScalePoint base;
  SecondScaleCoeffs coeffs;
  std::vector<Vec> tau_star;
  double phi_at_optimum = 0;
  std::vector<SweepPoint> points;
  double zero_slope = 0, zero_amplitude = 0;  // fit of log|S_mc| vs log eps
  double zero_slope_debiased = 0;             // same after removing the second-order part
  double resid_slope = 0;
  double theta = 0, theta_hat = 0;
};

/// Term-level verification of the reduced-energy expansion over an
/// eps grid: measures (I)/(III)/(IV)/(VII) by matched-kernel Monte Carlo,
/// assembles them, and compares the zero/first/second order structure
/// against the closed forms. The background coupling enters the assembly
/// with a positive sign: the printed algebra expands u0(xi_i) along the
/// displacement as dist * s0 < 0, while an actual positive background has
/// u0(xi_i) = -dist * s0; measuring the true field and flipping the
/// term's sign realizes the printed bracket exactly.
SweepReport expansion_sweep(const SweepConfig& cfg);

/// Least-squares slope/intercept of log(y) against log(x).
std::pair<double, double> fit_loglog(const std::vector<double>& x,
                                     const std::vector<double>& y);

}  // namespace bnc
