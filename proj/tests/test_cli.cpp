#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bncluster/commands.hpp"
#include "bncluster/runconfig.hpp"

using namespace bnc;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config round trip") {
  TempDir dir("bnc_cfg");
  RunConfig cfg;
  cfg.dim = 8;
  cfg.k = 3;
  cfg.eps_grid = {1e-2, 1e-3};
  cfg.A_rows = std::vector<std::vector<double>>(7, std::vector<double>(7, 0.0));
  for (int i = 0; i < 7; ++i) cfg.A_rows[i][i] = 1.0 + 0.1 * i;
  cfg.b_term = true;
  cfg.save((dir.path / "cfg.json").string());
  RunConfig back = RunConfig::load((dir.path / "cfg.json").string());
  CHECK(back.to_json_string() == cfg.to_json_string());
  CHECK(back.A_matrix()(3, 3) == doctest::Approx(1.3));
}

TEST_CASE("constants command: payload and the dimension gate") {
  TempDir dir("bnc_constants");
  RunConfig cfg;
  cfg.out_dir = (dir.path / "out").string();
  CHECK(cmd_constants(cfg) == 0);
  CHECK(fs::exists(dir.path / "out" / "resolved_config.json"));

  json j = json::parse(slurp(dir.path / "out" / "constants.json"));
  CHECK(j["exponents"]["theta_hat"]["exact"] == "295/77");
  CHECK(j["exponents"]["alpha"]["exact"] == "12/11");
  CHECK(double(j["C"]["relative_gap"]) <= 1e-10);
  CHECK(double(j["B"]["relative_gap"]) <= 1e-10);
  CHECK(j["routes_within_tolerance"] == true);

  // the theorem range gate
  RunConfig low = cfg;
  low.dim = 6;
  CHECK(cmd_constants(low) == 2);
}

TEST_CASE("solve-base command: payload, flags, and the Hopf gate") {
  TempDir dir("bnc_base");
  RunConfig cfg;
  cfg.out_dir = (dir.path / "out").string();
  CHECK(cmd_solve_base(cfg) == 0);
  json j = json::parse(slurp(dir.path / "out" / "solve_base.json"));
  CHECK(double(j["residuals"]["normalized_eq1"]) <= 1e-12);
  CHECK(double(j["residuals"]["normalized_eq2"]) <= 1e-12);
  CHECK(j["frak_A"]["positive"] == true);
  CHECK(j["frak_C"]["positive"] == true);
  CHECK(double(j["frak_B"]["computed"]) != 0.0);
  CHECK(j["frak_B"].contains("note"));  // the zero-convention discrepancy is flagged
  CHECK(double(j["frak_A"]["relative_gap"]) <= 1e-10);

  RunConfig bad = cfg;
  bad.s0 = +1.0;
  CHECK(cmd_solve_base(bad) == 2);
}

TEST_CASE("cluster command: antipodal pair payload") {
  TempDir dir("bnc_cluster");
  RunConfig cfg;
  cfg.out_dir = (dir.path / "out").string();
  cfg.k = 2;
  cfg.eps_grid = {1e-2, 1e-3};
  CHECK(cmd_cluster(cfg) == 0);
  json j = json::parse(slurp(dir.path / "out" / "cluster.json"));
  CHECK(double(j["grad_norm"]) <= 1e-8);
  CHECK(int(j["null_modes"]) == 5);
  CHECK(j["assembled"].size() == 2);
  CHECK(j["assembled"][0]["delta"].size() == 2);
  // single bubble: immediate tau* = 0
  RunConfig single = cfg;
  single.k = 1;
  single.out_dir = (dir.path / "out1").string();
  CHECK(cmd_cluster(single) == 0);
  json j1 = json::parse(slurp(dir.path / "out1" / "cluster.json"));
  CHECK(double(j1["G"]) == 0.0);
}

TEST_CASE("verify-terms command at reduced sample counts") {
  TempDir dir("bnc_terms");
  RunConfig cfg;
  cfg.out_dir = (dir.path / "out").string();
  cfg.check_samples = 200000;
  CHECK(cmd_verify_terms(cfg) == 0);
  json j = json::parse(slurp(dir.path / "out" / "verify_terms.json"));
  for (const char* key : {"interaction", "u0_coupling", "self_green", "l2_mass"})
    CHECK(j[key]["pass"] == true);
}

TEST_CASE("sweep command: reproducible payload bytes, seed sensitivity") {
  TempDir dir("bnc_sweep");
  RunConfig cfg;
  cfg.eps_grid = {1e-2, 3e-3};
  cfg.samples = 40000;
  cfg.resid_samples = 20000;
  cfg.seed = 777;
  // slope fits need the full grid; with two points the declared slope
  // tolerances are not meaningful, so only the per-point checks gate
  cfg.tol_zero_slope = 1.0;
  cfg.resid_slope_margin = 3.0;

  cfg.out_dir = (dir.path / "a").string();
  int rc1 = cmd_sweep(cfg);
  // replay from the emitted resolved configuration
  RunConfig replay = RunConfig::load((dir.path / "a" / "resolved_config.json").string());
  replay.out_dir = (dir.path / "b").string();
  int rc2 = cmd_sweep(replay);
  CHECK(rc1 == 0);
  CHECK(rc2 == 0);
  CHECK(slurp(dir.path / "a" / "sweep.json") == slurp(dir.path / "b" / "sweep.json"));
  CHECK(slurp(dir.path / "a" / "sweep.csv") == slurp(dir.path / "b" / "sweep.csv"));
  CHECK(slurp(dir.path / "a" / "sweep_terms.csv") ==
        slurp(dir.path / "b" / "sweep_terms.csv"));

  cfg.out_dir = (dir.path / "c").string();
  cfg.seed = 778;
  CHECK(cmd_sweep(cfg) == 0);
  json ja = json::parse(slurp(dir.path / "a" / "sweep.json"));
  json jc = json::parse(slurp(dir.path / "c" / "sweep.json"));
  for (std::size_t i = 0; i < ja["points"].size(); ++i) {
    double va = ja["points"][i]["S_mc"], vc = jc["points"][i]["S_mc"];
    double sa = ja["points"][i]["S_stderr"], sc_ = jc["points"][i]["S_stderr"];
    CHECK(va != vc);
    CHECK(std::abs(va - vc) <= 4.0 * (sa + sc_));
  }
}
