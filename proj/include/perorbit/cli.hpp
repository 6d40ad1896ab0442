#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "perorbit/checker.hpp"
#include "perorbit/orbit.hpp"
#include "perorbit/report.hpp"
#include "perorbit/system.hpp"

namespace perorbit {

constexpr const char* kToolVersion = "0.1.0";

enum ExitCode { kExitOk = 0, kExitFail = 1, kExitUsage = 2, kExitInconclusive = 3 };

struct DomainConfig {
  std::string kind;  // "ball" or "level_set"
  Eigen::VectorXd center;
  double radius = 0.0;
  std::string h;
  Eigen::VectorXd box_lo, box_hi;
};

struct RunConfig {
  std::string command;
  std::optional<std::string> scenario;
  std::map<std::string, double> scenario_params;
  std::optional<SystemDefinition> inline_system;
  std::optional<DomainConfig> domain;
  CertifyConfig certify;
  SolveConfig solve;
  std::optional<double> epsilon;
  std::vector<double> eps_list;
  /// degree command: fixture name or k expressions in x1..xk.
  std::optional<std::string> degree_fixture;
  std::vector<std::string> degree_map;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_text;
};

/// Validates a parsed config document (schema 1). Errors name the offending field.
RunConfig parse_config(const Json& doc, const std::string& command);

/// Executes a validated config, writing artifacts into config.out_dir.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// `perorbit <command> --config <path> [--seed N] [--out DIR]`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace perorbit
