#include "bncluster/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "bncluster/background.hpp"
#include "bncluster/bubbles.hpp"
#include "bncluster/geometry.hpp"
#include "bncluster/reduction.hpp"
#include "bncluster/verify.hpp"

namespace bnc {

using json = nlohmann::ordered_json;

namespace {

void write_payload(const RunConfig& cfg, const std::string& name, const json& j) {
  std::filesystem::create_directories(cfg.out_dir);
  cfg.save(cfg.out_dir + "/resolved_config.json");
  std::ofstream out(cfg.out_dir + "/" + name);
  if (!out) throw std::runtime_error("cannot write " + cfg.out_dir + "/" + name);
  out << j.dump(2) << "\n";
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

int require_theorem_dim(const RunConfig& cfg) {
  if (cfg.dim < 7) {
    std::cerr << "error: dim = " << cfg.dim
              << " rejected; the cluster construction requires N >= 7\n";
    return 2;
  }
  return 0;
}

U0Field build_u0(const RunConfig& cfg) {
  if (cfg.u0_kind == "mock")
    return mock_u0(cfg.dim, cfg.s0, cfg.A_matrix(), cfg.cutoff);
  if (cfg.u0_kind == "annulus") {
    ShootingResult sr =
        shoot_annulus_u0(cfg.annulus_a, cfg.annulus_b, cfg.dim, cfg.shoot_tol);
    return annulus_u0_field(sr);
  }
  throw std::invalid_argument("config: u0.kind must be mock or annulus");
}

}  // namespace

int cmd_constants(const RunConfig& cfg) {
  if (int rc = require_theorem_dim(cfg)) return rc;
  UniversalConstants uc = universal_constants(cfg.dim);
  ExponentLadder L = exponent_ladder(cfg.dim);

  json j;
  j["dim"] = cfg.dim;
  j["alpha_N"] = uc.alpha_N;
  j["C"] = {{"beta_route", uc.C_const}, {"quadrature_route", uc.C_quad},
            {"relative_gap", std::abs(uc.C_quad / uc.C_const - 1.0)}};
  j["B"] = {{"beta_route", uc.B_const}, {"quadrature_route", uc.B_quad},
            {"relative_gap", std::abs(uc.B_quad / uc.B_const - 1.0)}};
  j["int_U_2star"] = {{"beta_route", uc.int_U_2star},
                      {"quadrature_route", uc.int_U_2star_quad},
                      {"relative_gap",
                       std::abs(uc.int_U_2star_quad / uc.int_U_2star - 1.0)}};
  j["exponents"] = {
      {"alpha", {{"exact", L.alpha.str()}, {"decimal", L.alpha.to_double()}}},
      {"beta", {{"exact", L.beta.str()}, {"decimal", L.beta.to_double()}}},
      {"alpha_hat", {{"exact", L.alpha_hat.str()}, {"decimal", L.alpha_hat.to_double()}}},
      {"beta_hat", {{"exact", L.beta_hat.str()}, {"decimal", L.beta_hat.to_double()}}},
      {"beta_tilde", {{"exact", L.beta_tilde.str()}, {"decimal", L.beta_tilde.to_double()}}},
      {"theta", {{"exact", L.theta.str()}, {"decimal", L.theta.to_double()}}},
      {"theta_hat", {{"exact", L.theta_hat.str()}, {"decimal", L.theta_hat.to_double()}}}};
  bool ok = uc.max_route_gap() <= cfg.tol_routes;
  j["routes_within_tolerance"] = ok;
  write_payload(cfg, "constants.json", j);
  return ok ? 0 : 1;
}

int cmd_solve_base(const RunConfig& cfg) {
  if (int rc = require_theorem_dim(cfg)) return rc;
  if (!(cfg.s0 < 0.0)) {
    std::cerr << "error: s0 = " << cfg.s0
              << " rejected; the Hopf sign requires s0 < 0\n";
    return 2;
  }
  UniversalConstants uc = universal_constants(cfg.dim);
  FirstScalePoint fp = solve_first_scale(cfg.s0, uc);
  SecondScaleCoeffs sc = second_scale_coeffs(fp, uc);

  json j;
  j["d0"] = fp.d0;
  j["t0"] = fp.t0;
  j["s0"] = fp.s0;
  j["residuals"] = {{"normalized_eq1", fp.res1},
                    {"normalized_eq2", fp.res2},
                    {"raw_eq1", fp.raw1},
                    {"raw_eq2", fp.raw2},
                    {"note",
                     "normalized residuals divide out the C ~ 1e4 equation "
                     "scale; the raw gradient entries are reported alongside"}};
  j["frak_A"] = {{"direct", sc.frak_A},
                 {"substituted", sc.frak_A_sub},
                 {"relative_gap", std::abs(sc.frak_A_sub / sc.frak_A - 1.0)},
                 {"positive", sc.frak_A > 0.0},
                 {"legacy_variant", sc.frak_A_legacy},
                 {"legacy_variant_substituted", sc.frak_A_legacy_sub},
                 {"note",
                  "direct = half d^2Psi/dd^2; the legacy variant doubles the "
                  "quadratic coupling coefficient and its substituted form "
                  "relies on a d-equation missing a factor (N-2); reported "
                  "for auditing"}};
  j["frak_B"] = {{"computed", sc.frak_B},
                 {"reduced_closed_form", sc.frak_B_reduced},
                 {"relative_gap", std::abs(sc.frak_B_reduced / sc.frak_B - 1.0)},
                 {"note",
                  "conventionally set to zero through the t-equation; the "
                  "substitution actually leaves the nonzero value reported "
                  "here. Predictions default to the zero convention; enable "
                  "b_term to include it"}};
  j["frak_C"] = {{"value", sc.frak_C}, {"positive", sc.frak_C > 0.0}};
  j["g0"] = sc.g0;

  bool ok = fp.res1 <= cfg.tol_residuals && fp.res2 <= cfg.tol_residuals &&
            sc.frak_A > 0.0 && sc.frak_C > 0.0 &&
            std::abs(sc.frak_A_sub / sc.frak_A - 1.0) <= cfg.tol_coeff_forms &&
            std::abs(sc.frak_B_reduced / sc.frak_B - 1.0) <= cfg.tol_coeff_forms;
  j["within_tolerance"] = ok;
  write_payload(cfg, "solve_base.json", j);
  return ok ? 0 : 1;
}

int cmd_cluster(const RunConfig& cfg) {
  if (int rc = require_theorem_dim(cfg)) return rc;
  UniversalConstants uc = universal_constants(cfg.dim);
  FirstScalePoint fp = solve_first_scale(cfg.s0, uc);
  ClusterOptResult opt = optimize_cluster(cfg.k, cfg.A_matrix(), fp, uc, cfg.seed);
  ExponentLadder L = exponent_ladder(cfg.dim);

  Domain dom = cfg.domain_kind == "ball"
                   ? Domain::ball(cfg.dim, cfg.ball_radius)
                   : Domain::half_space(cfg.dim);
  Vec base = Vec::Zero(cfg.dim);
  if (dom.kind == DomainKind::Ball) base[cfg.dim - 1] = cfg.ball_radius;
  BoundaryChart chart = make_chart(dom, base);

  json j;
  j["k"] = cfg.k;
  j["tau_star"] = json::array();
  for (const auto& t : opt.tau) j["tau_star"].push_back(vec_to_json(t));
  j["G"] = opt.G;
  j["grad_norm"] = opt.grad_norm;
  j["hessian_eigenvalues"] = json::array();
  for (int i = 0; i < opt.hessian_eigenvalues.size(); ++i)
    j["hessian_eigenvalues"].push_back(opt.hessian_eigenvalues[i]);
  j["null_modes"] = opt.null_modes;
  j["center_of_mass"] = vec_to_json(opt.center_of_mass);
  j["starts"] = opt.starts;

  json per_eps = json::array();
  for (double eps : cfg.eps_grid) {
    ClusterParams params;
    params.eps = eps;
    params.k = cfg.k;
    params.first = fp;
    params.d.assign(cfg.k, 0.0);
    params.t.assign(cfg.k, 0.0);
    params.tau = opt.tau;
    params.chart = chart;
    json e;
    e["eps"] = eps;
    try {
      AssembledCluster asmb = assemble_cluster(params, L);
      e["delta"] = asmb.delta;
      e["xi"] = json::array();
      for (const auto& x : asmb.xi) e["xi"].push_back(vec_to_json(x));
      e["boundary_dist"] = asmb.boundary_dist;
    } catch (const std::exception& ex) {
      e["error"] = ex.what();
    }
    per_eps.push_back(e);
  }
  j["assembled"] = per_eps;

  bool ok = opt.grad_norm <= cfg.tol_grad;
  j["within_tolerance"] = ok;
  write_payload(cfg, "cluster.json", j);
  return ok ? 0 : 1;
}

namespace {

json sweep_to_json(const SweepReport& rep) {
  json j;
  j["base"] = {{"d0", rep.base.d0}, {"t0", rep.base.t0}, {"s0", rep.base.s0}};
  j["coeffs"] = {{"frak_A", rep.coeffs.frak_A},
                 {"frak_B", rep.coeffs.frak_B},
                 {"frak_C", rep.coeffs.frak_C},
                 {"g0", rep.coeffs.g0}};
  j["tau_star"] = json::array();
  for (const auto& t : rep.tau_star) j["tau_star"].push_back(vec_to_json(t));
  j["phi_at_optimum"] = rep.phi_at_optimum;
  j["theta"] = rep.theta;
  j["theta_hat"] = rep.theta_hat;
  j["zero_slope"] = rep.zero_slope;
  j["zero_slope_debiased"] = rep.zero_slope_debiased;
  j["zero_amplitude"] = rep.zero_amplitude;
  j["resid_slope"] = rep.resid_slope;
  j["points"] = json::array();
  for (const auto& pt : rep.points) {
    json p;
    p["eps"] = pt.eps;
    p["S_mc"] = pt.S_mc;
    p["S_stderr"] = pt.S_stderr;
    p["S_closed"] = pt.S_closed;
    p["order_zero"] = pt.order_zero;
    p["order_first"] = pt.order_first;
    p["order_second"] = pt.order_second;
    p["order_rem"] = pt.order_rem;
    p["first_residual"] = pt.first_residual;
    p["first_residual_se"] = pt.first_residual_se;
    p["second_residual"] = pt.second_residual;
    p["second_residual_se"] = pt.second_residual_se;
    p["phi_prediction"] = pt.phi_prediction;
    p["resid_norm"] = pt.resid_norm;
    p["resid_stderr"] = pt.resid_stderr;
    p["dropped"] = pt.dropped;
    if (!pt.note.empty()) p["note"] = pt.note;
    p["terms"] = json::array();
    for (const auto& t : pt.terms) {
      p["terms"].push_back({{"name", t.name},
                            {"value", t.value},
                            {"std_error", t.std_error},
                            {"closed", t.closed},
                            {"ratio", t.ratio},
                            {"samples", t.samples}});
    }
    j["points"].push_back(p);
  }
  return j;
}

void write_sweep_csv(const RunConfig& cfg, const SweepReport& rep) {
  std::ofstream csv(cfg.out_dir + "/sweep.csv");
  csv << "eps,S_mc,S_stderr,S_closed,order_zero,order_first,order_second,"
         "order_rem,first_residual,first_residual_se,second_residual,"
         "second_residual_se,phi_prediction,resid_norm,resid_stderr,dropped\n";
  csv.precision(17);
  for (const auto& pt : rep.points) {
    csv << pt.eps << ',' << pt.S_mc << ',' << pt.S_stderr << ',' << pt.S_closed
        << ',' << pt.order_zero << ',' << pt.order_first << ','
        << pt.order_second << ',' << pt.order_rem << ',' << pt.first_residual
        << ',' << pt.first_residual_se << ',' << pt.second_residual << ','
        << pt.second_residual_se << ',' << pt.phi_prediction << ','
        << pt.resid_norm << ',' << pt.resid_stderr << ',' << pt.dropped
        << '\n';
  }
  std::ofstream terms(cfg.out_dir + "/sweep_terms.csv");
  terms << "eps,name,value,std_error,closed,ratio,samples\n";
  terms.precision(17);
  for (const auto& pt : rep.points)
    for (const auto& t : pt.terms)
      terms << pt.eps << ',' << t.name << ',' << t.value << ',' << t.std_error
            << ',' << t.closed << ',' << t.ratio << ',' << t.samples << '\n';
}

}  // namespace

int cmd_sweep(const RunConfig& cfg) {
  if (int rc = require_theorem_dim(cfg)) return rc;
  SweepConfig sc;
  sc.dim = cfg.dim;
  sc.box_L = cfg.box_L;
  sc.s0 = cfg.s0;
  sc.A = cfg.A_matrix();
  sc.cutoff = cfg.cutoff;
  sc.k = cfg.k;
  sc.eps_grid = cfg.eps_grid;
  sc.samples = cfg.samples;
  sc.resid_samples = cfg.resid_samples;
  sc.seed = cfg.seed;
  sc.block_size = cfg.block_size;
  sc.b_term = cfg.b_term;
  SweepReport rep = expansion_sweep(sc);

  json j = sweep_to_json(rep);

  bool ok = std::abs(rep.zero_slope - rep.theta) <= cfg.tol_zero_slope;
  for (const auto& pt : rep.points) {
    if (pt.dropped) continue;
    ok = ok && std::abs(pt.first_residual) <=
                   cfg.tol_first_sigmas * pt.first_residual_se;
  }
  // second-order comparison at the two smallest eps
  int counted = 0;
  for (auto it = rep.points.rbegin(); it != rep.points.rend() && counted < 2; ++it) {
    if (it->dropped) continue;
    ok = ok && std::abs(it->second_residual / it->phi_prediction - 1.0) <=
                   cfg.tol_second_rel;
    ++counted;
  }
  ok = ok && rep.resid_slope >= 0.5 * rep.theta_hat - cfg.resid_slope_margin;
  j["within_tolerance"] = ok;

  write_payload(cfg, "sweep.json", j);
  write_sweep_csv(cfg, rep);
  return ok ? 0 : 1;
}

int cmd_verify_terms(const RunConfig& cfg) {
  if (int rc = require_theorem_dim(cfg)) return rc;
  const int n = cfg.dim;
  UniversalConstants uc = universal_constants(n);
  Domain dom = Domain::half_space(n);
  Region region = Region::half_space_box(n, cfg.box_L);
  U0Field u0 = build_u0(cfg);

  json j;
  bool ok = true;

  {  // interaction of two equal bubbles at depth 0.5, tangential separation
    Vec xi = Vec::Zero(n), xh = Vec::Zero(n);
    xi[n - 1] = xh[n - 1] = 0.5;
    xi[0] = 0.5 * cfg.check_separation;
    xh[0] = -0.5 * cfg.check_separation;
    Bubble bi(cfg.check_delta, xi, n), bh(cfg.check_delta, xh, n);
    RatioResult r = interaction_ratio(bi, bh, region, uc, cfg.check_samples,
                                      cfg.seed, cfg.block_size);
    bool pass = std::abs(r.ratio - 1.0) <= cfg.tol_interaction;
    ok = ok && pass;
    j["interaction"] = {{"ratio", r.ratio},       {"std_error", r.std_error},
                        {"reference", r.reference}, {"pass", pass},
                        {"warning", r.warning}};
  }
  {  // background coupling, delta one decade smaller, shallow center
    Vec xi = Vec::Zero(n);
    xi[n - 1] = cfg.check_dist_coupling;
    Bubble b(0.1 * cfg.check_delta, xi, n);
    RatioResult r = u0_coupling_ratio(b, u0, region, uc, cfg.check_samples,
                                      cfg.seed + 1, cfg.block_size);
    bool pass = std::abs(r.ratio - 1.0) <= cfg.tol_coupling;
    ok = ok && pass;
    j["u0_coupling"] = {{"ratio", r.ratio}, {"std_error", r.std_error},
                        {"reference", r.reference}, {"pass", pass}};
  }
  {  // self Green term at depth dist_self
    Vec xi = Vec::Zero(n);
    xi[n - 1] = cfg.check_dist_self;
    ProjectedBubble pb{Bubble(cfg.check_delta, xi, n), dom,
                       ProjectionOrder::LeadingWithBudget};
    RatioResult r = self_h_ratio(pb, region, uc, cfg.check_samples,
                                 cfg.seed + 2, cfg.block_size);
    bool pass = std::abs(r.ratio - 1.0) <= cfg.tol_self_h;
    ok = ok && pass;
    j["self_green"] = {{"ratio", r.ratio}, {"std_error", r.std_error},
                       {"reference", r.reference}, {"pass", pass},
                       {"warning", r.warning}};
  }
  {  // L2 mass at depth 0.5
    Vec xi = Vec::Zero(n);
    xi[n - 1] = 0.5;
    Bubble b(cfg.check_delta, xi, n);
    RatioResult r = l2_mass_ratio(b, 1e-3, region, uc, cfg.check_samples,
                                  cfg.seed + 3, cfg.block_size);
    bool pass = std::abs(r.ratio - 1.0) <= cfg.tol_l2;
    ok = ok && pass;
    j["l2_mass"] = {{"ratio", r.ratio}, {"std_error", r.std_error},
                    {"reference", r.reference}, {"pass", pass}};
  }
  j["within_tolerance"] = ok;
  write_payload(cfg, "verify_terms.json", j);
  return ok ? 0 : 1;
}

}  // namespace bnc
