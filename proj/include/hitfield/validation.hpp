#pragma once

// Self-checks run by `hitfield_cli validate`: the function algebra, the
// pathwise identities on random instances, and the laws by Monte Carlo.

#include <cstdint>
#include <string>
#include <vector>

#include "hitfield/io.hpp"

namespace hitfield {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  bool pass() const;
};

Json suite_to_json(const SuiteReport& r);

struct SuiteOptions {
  std::uint64_t seed = 1;
  int instances = 0;  // 0: suite default (1000 functions, 100 pathwise)
  long replications = 100000;
  double alpha = 0.001;
  int calibration_runs = 0;
  std::string test = "all";  // distributional: "chi-square" or "ks" keeps only those checks
  int jobs = 0;
};

/// Pathwise checks on one realization: exploration vs monotone iteration and
/// jumps vs R M.
std::vector<Check> check_encoding(const BlockModel& model, const ClockSet& clocks,
                                  const std::vector<double>& rho);
/// Curve checks on one realization; rho must make the field symmetric.
std::vector<Check> check_curve(const BlockModel& model, const ClockSet& clocks,
                               const std::vector<double>& rho);

SuiteReport validate_functions(const SuiteOptions& opt);
SuiteReport validate_pathwise(const SuiteOptions& opt);
SuiteReport validate_distributional(const SuiteOptions& opt);
/// "functions" | "pathwise" | "distributional"; throws PreconditionError.
SuiteReport run_suite(const std::string& suite, const SuiteOptions& opt);

}  // namespace hitfield
