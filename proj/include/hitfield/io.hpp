#pragma once

// JSON and CSV exchange formats, and the versioned run configuration.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hitfield/block_model.hpp"
#include "hitfield/curve.hpp"
#include "hitfield/field.hpp"
#include "hitfield/montecarlo.hpp"
#include "hitfield/piecewise.hpp"

namespace hitfield {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kArtifactVersion = "1.0.0";

/// Schema violation. what() is "<source>:<line>: <field>: <problem>".
class ConfigError : public PreconditionError {
 public:
  ConfigError(const std::string& source, int line, const std::string& field,
              const std::string& problem);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

struct ExperimentSettings {
  long replications = 100000;
  double alpha = 0.001;
  std::string test = "all";  // "chi-square" or "ks" restricts the suite
  int calibration_runs = 0;
};

/// {"version": 1, "m", "weights", "Q", "rho"?, "seed"?, "clocks"?,
///  "experiment"?: {"replications", "alpha", "test", "calibration_runs"}}.
/// Unknown fields are rejected.
struct RunConfig {
  BlockModel model;
  std::vector<double> rho;  // all ones when absent
  bool rho_given = false;
  std::uint64_t seed = 1;
  std::optional<ClockSet> clocks;
  ExperimentSettings experiment;
};

RunConfig parse_config(std::string_view text, const std::string& source);
RunConfig load_config(const std::string& path);
Json config_to_json(const RunConfig& cfg);

/// Non-finite numbers are written as the strings "inf" / "-inf".
Json number_to_json(double x);
double number_from_json(const Json& j);

/// {initial, terminal_slope, breakpoints: [{t, left, right, slope}]}; slope
/// is that of the segment ending at t.
Json path_to_json(const PiecewisePath& p);
PiecewisePath path_from_json(const Json& j);

/// Per column j: jump times and the jump sizes (x_1j, ..., x_mj), plus the
/// drift of the diagonal path.
Json field_to_json(const Field& f);
/// Array of {k, kind, vertex, zeta, [y], [S_L, S_R]}.
Json trace_to_json(const ExplorationTrace& trace, const BlockModel& model);
Json hit_vector_to_json(const HitVector& h);
/// {rho, jumps: [{Y, delta}]}.
Json hitting_process_to_json(const HittingProcess& hp);
Json components_to_json(const std::vector<ComponentRecord>& comps,
                        const BlockModel& model, const std::vector<double>& rho);
/// Array of {l, r, length, increment}.
Json excursions_to_json(const std::vector<EncodedComponent>& enc);
Json test_result_to_json(const TestResult& r);
/// {config, counts, expected, statistic, p_value, pass}.
Json experiment_to_json(const Json& config, const Counts& counts,
                        const Law& expected, const TestResult& r, double alpha);

}  // namespace hitfield
