#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bnc {

/// Everything a run needs; a run is reproducible from this alone.
struct RunConfig {
  int dim = 7;

  std::string domain_kind = "half_space";  // half_space | ball | annulus
  double ball_radius = 1.0;
  double annulus_a = 1.0, annulus_b = 2.0;
  double box_L = 1.0;  // verification box half-width

  std::string u0_kind = "mock";  // mock | annulus
  double s0 = -1.0;
  std::vector<std::vector<double>> A_rows;  // empty = identity
  double cutoff = 1.0;
  double shoot_tol = 1e-10;

  int k = 2;
  std::vector<double> eps_grid = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  long long samples = 2'000'000;
  long long resid_samples = 1'000'000;
  long long block_size = 1 << 16;
  std::uint64_t seed = 20260809;
  bool b_term = false;

  // verify-terms scenario (criterion-style spot checks)
  double check_delta = 1e-3;
  double check_separation = 0.1;
  double check_dist_self = 0.1;
  double check_dist_coupling = 0.05;
  long long check_samples = 2'000'000;

  // declared tolerances
  double tol_routes = 1e-10;
  double tol_residuals = 1e-12;
  double tol_grad = 1e-8;
  double tol_coeff_forms = 1e-10;
  double tol_radius = 1e-6;
  double tol_interaction = 0.02;
  double tol_coupling = 0.02;
  double tol_l2 = 0.02;
  double tol_self_h = 0.05;
  double tol_zero_slope = 0.15;
  double tol_first_sigmas = 3.0;
  double tol_second_rel = 0.10;
  double resid_slope_margin = 0.2;

  std::string out_dir = "out";

  Eigen::MatrixXd A_matrix() const;  // identity when A_rows is empty

  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_json_string() const;
};

}  // namespace bnc
