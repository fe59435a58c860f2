#include "bncluster/runconfig.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace bnc {

using json = nlohmann::ordered_json;

namespace {

json to_json(const RunConfig& c) {
  json j;
  j["dim"] = c.dim;
  j["domain"] = {{"kind", c.domain_kind},
                 {"ball_radius", c.ball_radius},
                 {"annulus_a", c.annulus_a},
                 {"annulus_b", c.annulus_b},
                 {"box_L", c.box_L}};
  j["u0"] = {{"kind", c.u0_kind}, {"s0", c.s0},     {"A", c.A_rows},
             {"cutoff", c.cutoff}, {"a", c.annulus_a}, {"b", c.annulus_b},
             {"shoot_tol", c.shoot_tol}};
  j["k"] = c.k;
  j["eps_grid"] = c.eps_grid;
  j["samples"] = c.samples;
  j["resid_samples"] = c.resid_samples;
  j["block_size"] = c.block_size;
  j["seed"] = c.seed;
  j["b_term"] = c.b_term;
  j["checks"] = {{"delta", c.check_delta},
                 {"separation", c.check_separation},
                 {"dist_self", c.check_dist_self},
                 {"dist_coupling", c.check_dist_coupling},
                 {"samples", c.check_samples}};
  j["tolerances"] = {{"routes", c.tol_routes},
                     {"residuals", c.tol_residuals},
                     {"grad", c.tol_grad},
                     {"coeff_forms", c.tol_coeff_forms},
                     {"radius", c.tol_radius},
                     {"interaction", c.tol_interaction},
                     {"coupling", c.tol_coupling},
                     {"l2", c.tol_l2},
                     {"self_h", c.tol_self_h},
                     {"zero_slope", c.tol_zero_slope},
                     {"first_sigmas", c.tol_first_sigmas},
                     {"second_rel", c.tol_second_rel},
                     {"resid_slope_margin", c.resid_slope_margin}};
  j["out_dir"] = c.out_dir;
  return j;
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void from_json(const json& j, RunConfig& c) {
  maybe(j, "dim", c.dim);
  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    maybe(d, "kind", c.domain_kind);
    maybe(d, "ball_radius", c.ball_radius);
    maybe(d, "annulus_a", c.annulus_a);
    maybe(d, "annulus_b", c.annulus_b);
    maybe(d, "box_L", c.box_L);
  }
  if (j.contains("u0")) {
    const auto& u = j.at("u0");
    maybe(u, "kind", c.u0_kind);
    maybe(u, "s0", c.s0);
    maybe(u, "A", c.A_rows);
    maybe(u, "cutoff", c.cutoff);
    maybe(u, "a", c.annulus_a);
    maybe(u, "b", c.annulus_b);
    maybe(u, "shoot_tol", c.shoot_tol);
  }
  maybe(j, "k", c.k);
  maybe(j, "eps_grid", c.eps_grid);
  maybe(j, "samples", c.samples);
  maybe(j, "resid_samples", c.resid_samples);
  maybe(j, "block_size", c.block_size);
  maybe(j, "seed", c.seed);
  maybe(j, "b_term", c.b_term);
  if (j.contains("checks")) {
    const auto& ch = j.at("checks");
    maybe(ch, "delta", c.check_delta);
    maybe(ch, "separation", c.check_separation);
    maybe(ch, "dist_self", c.check_dist_self);
    maybe(ch, "dist_coupling", c.check_dist_coupling);
    maybe(ch, "samples", c.check_samples);
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    maybe(t, "routes", c.tol_routes);
    maybe(t, "residuals", c.tol_residuals);
    maybe(t, "grad", c.tol_grad);
    maybe(t, "coeff_forms", c.tol_coeff_forms);
    maybe(t, "radius", c.tol_radius);
    maybe(t, "interaction", c.tol_interaction);
    maybe(t, "coupling", c.tol_coupling);
    maybe(t, "l2", c.tol_l2);
    maybe(t, "self_h", c.tol_self_h);
    maybe(t, "zero_slope", c.tol_zero_slope);
    maybe(t, "first_sigmas", c.tol_first_sigmas);
    maybe(t, "second_rel", c.tol_second_rel);
    maybe(t, "resid_slope_margin", c.resid_slope_margin);
  }
  maybe(j, "out_dir", c.out_dir);
}

}  // namespace

Eigen::MatrixXd RunConfig::A_matrix() const {
  const int m = dim - 1;
  if (A_rows.empty()) return Eigen::MatrixXd::Identity(m, m);
  if (static_cast<int>(A_rows.size()) != m)
    throw std::invalid_argument("config: u0.A must have dim-1 rows");
  Eigen::MatrixXd A(m, m);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(A_rows[i].size()) != m)
      throw std::invalid_argument("config: u0.A rows must have dim-1 entries");
    for (int j = 0; j < m; ++j) A(i, j) = A_rows[i][j];
  }
  return A;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j = json::parse(in);
  RunConfig c;
  from_json(j, c);
  return c;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << to_json(*this).dump(2) << "\n";
}

std::string RunConfig::to_json_string() const { return to_json(*this).dump(2); }

}  // namespace bnc
