#pragma once

#include <string>

#include "bncluster/runconfig.hpp"

namespace bnc {

/// Batch commands: each writes the resolved config plus a machine-readable
/// payload under cfg.out_dir and returns 0 on success, 1 if a declared
/// tolerance failed, 2 on hard errors (invalid inputs).
int cmd_constants(const RunConfig& cfg);
int cmd_solve_base(const RunConfig& cfg);
int cmd_cluster(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_verify_terms(const RunConfig& cfg);

}  // namespace bnc
