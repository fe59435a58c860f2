#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bncluster/bubbles.hpp"
#include "bncluster/types.hpp"

namespace bnc {

enum class DomainKind { HalfSpace, Ball, Annulus };

/// Half-space {x_N > 0}, ball of radius R, or annulus a < |x| < b.
/// The first two carry method-of-images Green functions; the annulus
/// exists to host the radial background solution only.
struct Domain {
  DomainKind kind = DomainKind::HalfSpace;
  int dim = 7;
  double radius = 1.0;   // ball
  double inner = 0.5;    // annulus
  double outer = 1.0;    // annulus

  static Domain half_space(int dim) {
    Domain d;
    d.kind = DomainKind::HalfSpace;
    d.dim = dim;
    return d;
  }
  static Domain ball(int dim, double R) {
    if (!(R > 0)) throw std::invalid_argument("ball radius must be positive");
    Domain d;
    d.kind = DomainKind::Ball;
    d.dim = dim;
    d.radius = R;
    return d;
  }
  static Domain annulus(int dim, double a, double b) {
    if (!(0 < a && a < b)) throw std::invalid_argument("annulus needs 0 < a < b");
    Domain d;
    d.kind = DomainKind::Annulus;
    d.dim = dim;
    d.inner = a;
    d.outer = b;
    return d;
  }

  bool contains(const Vec& x) const;
  double boundary_distance(const Vec& x) const;  // distance to the boundary set
  Vec outward_normal(const Vec& x) const;        // at the nearest boundary sheet
};

/// Regular part H of the Dirichlet Green function, normalized so that
///   G(x,y) = |x-y|^{2-N} - H(x,y)  and  H(xi,xi) -> (2 dist)^{2-N}
/// near the boundary. This gamma_N-free convention is the one every
/// projection and energy formula consumes; multiply by gamma_n(dim) for
/// the Dirac-normalized regular part. Closed forms exist for the
/// half-space (reflection) and the ball (Kelvin image); the annulus is
/// rejected.
double green_regular_part(const Domain& dom, const Vec& x, const Vec& y);

/// Gradient of H(xi, x) in its first argument.
Vec green_regular_part_dxi(const Domain& dom, const Vec& xi, const Vec& x);

/// H(xi,xi) * (2 dist)^{N-2} along a path of interior points approaching
/// the boundary; tends to 1 (exactly 1 on the half-space).
std::vector<double> boundary_h_ratio(const Domain& dom,
                                     const std::vector<Vec>& path);

/// Local graph description of the boundary around a base point: an
/// orthonormal tangent frame plus the height function theta with
/// grad theta(0) = 0.
struct BoundaryChart {
  Domain domain;
  Vec base;                       // xi0 on the boundary
  Eigen::MatrixXd tangent;        // dim x (dim-1), orthonormal columns
  Vec nu_out;                     // outward unit normal at base

  /// Boundary point lying over tangent offset xp.
  Vec boundary_point(const Vec& xp) const;
  /// Height of that point along nu_out, measured from the tangent plane.
  double theta(const Vec& xp) const;
  Vec inward_normal(const Vec& boundary_pt) const;
};

BoundaryChart make_chart(const Domain& dom, const Vec& base);

enum class ProjectionOrder { Leading, LeadingWithBudget };

/// Projected bubble represented by its leading approximation
///   PU(x) = U(x) - alpha_N delta^{(N-2)/2} H(xi, x),
/// together with an explicit sup-norm budget for the dropped remainder.
struct ProjectedBubble {
  Bubble bubble;
  Domain domain;
  ProjectionOrder order = ProjectionOrder::Leading;
};

double projected_bubble_value(const ProjectedBubble& pb, const Vec& x);
Vec projected_bubble_gradient(const ProjectedBubble& pb, const Vec& x);

/// Rigorous sup bound for |PU_exact - PU_approx| on the half-space
/// (max principle over the boundary trace): (N-2)/2 alpha_N
/// delta^{(N+2)/2} / dist^N. Used for the ball too, as the working budget.
double projection_error_budget(const ProjectedBubble& pb);

/// Leading approximations of the projected kernel functions:
///   P psi^0 = psi^0 + alpha_N (N-2)/2 delta^{(N-2)/2} H(xi, x)
///   P psi^j = psi^j + alpha_N delta^{N/2} dH/dxi_j (xi, x),   j >= 1.
/// The correction enters with a plus sign: psi^j - P psi^j equals minus
/// the harmonic extension of the (negative) boundary trace of psi^j.
double projected_psi_value(int j, const Bubble& b, const Domain& dom, const Vec& x);
double projected_psi_budget(int j, const Bubble& b, const Domain& dom);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long long samples = 0;
};

/// Monte-Carlo Poisson integral for the harmonic extension of U|_{boundary}
/// into the half-space, sampled from the Poisson kernel itself (mass
/// centered at the foot point of x). Deterministic for a given seed.
McEstimate poisson_extension_estimate(const Bubble& b, const Domain& dom,
                                      const Vec& x, long long samples,
                                      std::uint64_t seed,
                                      long long block_size = 1 << 16);

}  // namespace bnc
