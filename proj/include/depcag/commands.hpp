#pragma once

#include "depcag/certify.hpp"

#include <optional>
#include <string>
#include <vector>

namespace depcag {

struct CommandOptions {
  std::string command;  // check, dichotomy, solve, bounded, conjugacy, certify-all
  std::string conj_cmd;  // conjugacy: H, L, inverse, holder, map-check
  std::optional<std::vector<double>> xi;
  double tau = 0.0;
  std::optional<double> t;
  std::vector<std::string> g;  // bounded: one expression per component
};

struct CommandOutput {
  int exit_code = 0;
  std::string body;  // JSON report, or CSV for `solve`
};

std::vector<std::string> command_names();

/// Runs one command. Reports are JSON with sorted keys and carry the config
/// hash, the seed and every constant they used.
CommandOutput run_command(const RunConfig& cfg, const CommandOptions& opt);

/// Replaces the seed and refreshes the canonical document and hash.
RunConfig with_seed(RunConfig cfg, std::uint64_t seed);

/// RFC-4180 CSV of a trajectory: header t,x_1..x_n, CRLF line ends.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace depcag
