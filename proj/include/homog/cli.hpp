#pragma once

#include "homog/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace homog {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,          // I/O, parse errors, bad or out-of-range parameters
  kExitValidation = 2,
  kExitCrossCheck = 3,
  kExitCriteria = 4,       // rate or shrink criteria failed, or FloorContaminated
  kExitSolver = 5,
};

/// Parameters of one command run. Zero or empty means "use the problem default".
struct RunConfig {
  std::string command;
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::string format = "json";
  std::uint64_t seed = 1;
  int n_cell = 0;
  int n_slow = 0;
  int points_per_period = 16;
  int n_phys = 0;
  std::vector<int> periods;
  std::vector<double> eps;
  Complex lambda{-1.0, 0.0};
  int k = 3;
  std::vector<std::string> rhs;
  std::string cell_backend = "auto";
  double cell_accept_residual = 1e-10;
  bool fd_probe = true;
  double cross_check_tolerance = 1e-6;
  bool export_matrices = false;
  bool export_correctors = false;
};

/// Runs "homog <command> ...". Reports go to out, diagnostics to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace homog
