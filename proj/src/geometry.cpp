#include "bncluster/geometry.hpp"

#include <cmath>

#include "bncluster/rng.hpp"

namespace bnc {

bool Domain::contains(const Vec& x) const {
  switch (kind) {
    case DomainKind::HalfSpace:
      return x[dim - 1] > 0.0;
    case DomainKind::Ball:
      return x.norm() < radius;
    case DomainKind::Annulus: {
      double r = x.norm();
      return inner < r && r < outer;
    }
  }
  return false;
}

double Domain::boundary_distance(const Vec& x) const {
  switch (kind) {
    case DomainKind::HalfSpace:
      return std::abs(x[dim - 1]);
    case DomainKind::Ball:
      return std::abs(radius - x.norm());
    case DomainKind::Annulus: {
      double r = x.norm();
      return std::min(std::abs(r - inner), std::abs(outer - r));
    }
  }
  return 0.0;
}

Vec Domain::outward_normal(const Vec& x) const {
  Vec nu = Vec::Zero(dim);
  switch (kind) {
    case DomainKind::HalfSpace:
      nu[dim - 1] = -1.0;
      return nu;
    case DomainKind::Ball:
      return x.normalized();
    case DomainKind::Annulus: {
      double r = x.norm();
      // nearest sheet decides the sign; outer sphere points out, inner in
      if (std::abs(outer - r) <= std::abs(r - inner)) return x.normalized();
      return -x.normalized();
    }
  }
  return nu;
}

namespace {

// squared distance |x - y*| to the image point, computed symmetrically
double image_s2_half_space(const Vec& x, const Vec& y, int n) {
  double s2 = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    double d = x[i] - y[i];
    s2 += d * d;
  }
  double s = x[n - 1] + y[n - 1];
  return s2 + s * s;
}

// |x|^2 |y|^2 / R^2 - 2 x.y + R^2, the Kelvin-image quadratic form
double image_s2_ball(const Vec& x, const Vec& y, double R) {
  return x.squaredNorm() * y.squaredNorm() / (R * R) - 2.0 * x.dot(y) + R * R;
}

}  // namespace

double green_regular_part(const Domain& dom, const Vec& x, const Vec& y) {
  switch (dom.kind) {
    case DomainKind::HalfSpace:
      return pow_half(image_s2_half_space(x, y, dom.dim), -(dom.dim - 2));
    case DomainKind::Ball:
      return pow_half(image_s2_ball(x, y, dom.radius), -(dom.dim - 2));
    case DomainKind::Annulus:
      throw std::invalid_argument(
          "green_regular_part: no closed form on the annulus; use the "
          "oracle-free paths");
  }
  return 0.0;
}

Vec green_regular_part_dxi(const Domain& dom, const Vec& xi, const Vec& x) {
  const int n = dom.dim;
  Vec grad = Vec::Zero(n);
  double s2 = 0.0;
  switch (dom.kind) {
    case DomainKind::HalfSpace: {
      s2 = image_s2_half_space(x, xi, n);
      // d/dxi_j |x - xi*|^2: tangential -2(x_j - xi_j), normal +2(x_N + xi_N)
      for (int i = 0; i + 1 < n; ++i) grad[i] = -2.0 * (x[i] - xi[i]);
      grad[n - 1] = 2.0 * (x[n - 1] + xi[n - 1]);
      break;
    }
    case DomainKind::Ball: {
      s2 = image_s2_ball(x, xi, dom.radius);
      grad = 2.0 * (x.squaredNorm() / (dom.radius * dom.radius)) * xi - 2.0 * x;
      break;
    }
    case DomainKind::Annulus:
      throw std::invalid_argument("green_regular_part_dxi: annulus has no closed form");
  }
  const double factor = -0.5 * (dom.dim - 2) * pow_half(s2, -dom.dim);
  return factor * grad;
}

std::vector<double> boundary_h_ratio(const Domain& dom,
                                     const std::vector<Vec>& path) {
  std::vector<double> out;
  out.reserve(path.size());
  for (const Vec& xi : path) {
    double h = green_regular_part(dom, xi, xi);
    double d = dom.boundary_distance(xi);
    out.push_back(h * pow_half(4.0 * d * d, dom.dim - 2));
  }
  return out;
}

Vec BoundaryChart::boundary_point(const Vec& xp) const {
  Vec q = base + tangent * xp;
  switch (domain.kind) {
    case DomainKind::HalfSpace:
      return q;
    case DomainKind::Ball:
    case DomainKind::Annulus: {
      // slide along the normal axis until the sphere through `base` is hit
      const double R = base.norm();
      const double qn = q.dot(nu_out);
      const double disc = qn * qn - (q.squaredNorm() - R * R);
      if (disc < 0.0)
        throw std::domain_error("chart: offset leaves the graph patch");
      const double s = -qn + std::sqrt(disc);
      return q + s * nu_out;
    }
  }
  return q;
}

double BoundaryChart::theta(const Vec& xp) const {
  return (boundary_point(xp) - base).dot(nu_out);
}

Vec BoundaryChart::inward_normal(const Vec& p) const {
  return -domain.outward_normal(p);
}

BoundaryChart make_chart(const Domain& dom, const Vec& base) {
  if (dom.boundary_distance(base) > 1e-12 * (1.0 + base.norm()))
    throw std::invalid_argument("make_chart: base point is not on the boundary");
  BoundaryChart c;
  c.domain = dom;
  c.base = base;
  c.nu_out = dom.outward_normal(base);
  if (dom.kind == DomainKind::HalfSpace) {
    // identity frame keeps chart coordinates equal to ambient x'
    c.tangent = Eigen::MatrixXd::Identity(dom.dim, dom.dim).leftCols(dom.dim - 1);
    return c;
  }
  // orthonormal completion of nu_out via Householder QR of [nu | I]
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dom.dim, dom.dim);
  Eigen::VectorXd nu = c.nu_out;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(nu);
  Eigen::MatrixXd q = qr.householderQ() * m;
  c.tangent = q.rightCols(dom.dim - 1);
  return c;
}

double projected_bubble_value(const ProjectedBubble& pb, const Vec& x) {
  const Bubble& b = pb.bubble;
  const double h = green_regular_part(pb.domain, b.center, x);
  return bubble_value(b, x) -
         alpha_n(b.dim) * pow_half(b.delta, b.dim - 2) * h;
}

Vec projected_bubble_gradient(const ProjectedBubble& pb, const Vec& x) {
  const Bubble& b = pb.bubble;
  // H(xi, .) with symmetric closed forms: the x-gradient equals the
  // xi-gradient formula with arguments swapped.
  Vec dh = green_regular_part_dxi(pb.domain, x, b.center);
  return bubble_gradient(b, x) -
         alpha_n(b.dim) * pow_half(b.delta, b.dim - 2) * dh;
}

double projection_error_budget(const ProjectedBubble& pb) {
  const Bubble& b = pb.bubble;
  const double dist = pb.domain.boundary_distance(b.center);
  return 0.5 * (b.dim - 2) * alpha_n(b.dim) * pow_half(b.delta, b.dim + 2) /
         std::pow(dist, b.dim);
}

double projected_psi_value(int j, const Bubble& b, const Domain& dom,
                           const Vec& x) {
  if (j < 0 || j > b.dim)
    throw std::out_of_range("projected_psi_value: index must lie in 0..N");
  const double a = alpha_n(b.dim);
  if (j == 0) {
    double h = green_regular_part(dom, b.center, x);
    return kernel_psi(0, b, x) +
           0.5 * (b.dim - 2) * a * pow_half(b.delta, b.dim - 2) * h;
  }
  Vec dh = green_regular_part_dxi(dom, b.center, x);
  return kernel_psi(j, b, x) + a * pow_half(b.delta, b.dim) * dh[j - 1];
}

double projected_psi_budget(int j, const Bubble& b, const Domain& dom) {
  const double dist = dom.boundary_distance(b.center);
  const double a = alpha_n(b.dim);
  if (j == 0)
    return 0.25 * (b.dim - 2) * (b.dim + 2) * a *
           pow_half(b.delta, b.dim + 2) / std::pow(dist, b.dim);
  return 0.5 * (b.dim - 2) * b.dim * a * pow_half(b.delta, b.dim + 4) /
         std::pow(dist, b.dim + 1);
}

McEstimate poisson_extension_estimate(const Bubble& b, const Domain& dom,
                                      const Vec& x, long long samples,
                                      std::uint64_t seed,
                                      long long block_size) {
  if (dom.kind != DomainKind::HalfSpace)
    throw std::invalid_argument(
        "poisson_extension_estimate: closed-form kernel only on the half-space");
  if (!dom.contains(x))
    throw std::invalid_argument("poisson_extension_estimate: x must be interior");
  const int n = dom.dim;
  const double height = x[n - 1];

  // y' = x' + height * t with t distributed as c_N (1+|t|^2)^{-N/2} on
  // R^{N-1}; then phi(x) = E[ U(y', 0) ].
  KahanSum sum, sum2;
  long long done = 0;
  std::uint64_t block = 0;
  Vec y = Vec::Zero(n);
  Vec dir(n - 1);
  while (done < samples) {
    long long m = std::min(block_size, samples - done);
    Rng rng = Rng::for_block(seed, block++);
    KahanSum bs, bs2;
    for (long long i = 0; i < m; ++i) {
      double u = rng.beta(0.5 * (n - 1), 0.5);  // u = t^2/(1+t^2)
      double t = std::sqrt(u / (1.0 - u));
      rng.direction(n - 1, dir);
      for (int q = 0; q + 1 < n; ++q) y[q] = x[q] + height * t * dir[q];
      y[n - 1] = 0.0;
      double w = bubble_value(b, y);
      bs.add(w);
      bs2.add(w * w);
    }
    sum.add(bs.value());
    sum2.add(bs2.value());
    done += m;
  }
  McEstimate est;
  est.samples = samples;
  est.value = sum.value() / samples;
  double var = std::max(0.0, sum2.value() / samples - est.value * est.value);
  est.std_error = std::sqrt(var / samples);
  return est;
}

}  // namespace bnc
