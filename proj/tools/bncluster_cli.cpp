#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bncluster/commands.hpp"
#include "bncluster/runconfig.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Boundary-cluster reduction toolkit for the Brezis-Nirenberg problem"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  long long samples = 0;
  int dim = 0;
  std::string b_term;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "override RNG seed");
  app.add_option("--samples", samples, "override Monte-Carlo sample count");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--dim", dim, "override spatial dimension");
  app.add_option("--b-term", b_term, "coupling-term toggle: on|off")
      ->check(CLI::IsMember({"on", "off"}));

  auto* c_const = app.add_subcommand("constants", "universal constants and the exponent ladder");
  auto* c_base = app.add_subcommand("solve-base", "first-scale critical point and second-order coefficients");
  auto* c_clu = app.add_subcommand("cluster", "optimize the cluster configuration and assemble parameters");
  auto* c_sweep = app.add_subcommand("sweep", "eps-sweep of the expansion terms and the residual norm");
  auto* c_verify = app.add_subcommand("verify-terms", "spot checks of the term-level integral identities");

  CLI11_PARSE(app, argc, argv);

  try {
    bnc::RunConfig cfg;
    if (!config_path.empty()) cfg = bnc::RunConfig::load(config_path);
    if (seed != 0) cfg.seed = seed;
    if (samples != 0) {
      cfg.samples = samples;
      cfg.check_samples = samples;
      cfg.resid_samples = samples;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (dim != 0) cfg.dim = dim;
    if (!b_term.empty()) cfg.b_term = (b_term == "on");

    int rc = 0;
    if (c_const->parsed()) rc = bnc::cmd_constants(cfg);
    if (c_base->parsed()) rc = bnc::cmd_solve_base(cfg);
    if (c_clu->parsed()) rc = bnc::cmd_cluster(cfg);
    if (c_sweep->parsed()) rc = bnc::cmd_sweep(cfg);
    if (c_verify->parsed()) rc = bnc::cmd_verify_terms(cfg);
    if (rc == 0)
      std::cout << "ok: results under " << cfg.out_dir << "\n";
    else if (rc == 1)
      std::cerr << "tolerance failure: see " << cfg.out_dir << " payloads\n";
    return rc;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
