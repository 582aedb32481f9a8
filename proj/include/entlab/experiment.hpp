#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entlab/convex_body.hpp"
#include "entlab/density_model.hpp"
#include "entlab/inequality.hpp"

namespace entlab {

/// One entry of the `checks` list.
struct CheckSpec {
  std::string checker;
  std::vector<std::string> models;  // references into ExperimentConfig::models
  std::vector<std::string> bodies;  // references into ExperimentConfig::bodies
  std::vector<double> eps_grid;
  double kappa = 0.0;
  double eps = 0.0;
  CheckOptions options;
  std::string location;  // "file:line:column" of the entry
};

struct OutputSpec {
  std::filesystem::path dir;  // empty: caller decides
  bool jsonl = true;
  bool csv = true;
  bool svg = true;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::map<std::string, DensityModel> models;
  std::map<std::string, ConvexBody> bodies;
  std::vector<CheckSpec> checks;
  OutputSpec output;
};

/// Parses a YAML experiment. Unknown families, checkers or keys and
/// unresolved references throw ConfigError naming the location.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunResult {
  std::vector<InequalityReport> reports;
  std::vector<ConcentrationProfile> profiles;
  /// Stage records of reverse-EPI checks, keyed by check index.
  std::map<std::size_t, std::vector<StageRecord>> stages;

  [[nodiscard]] bool all_satisfied() const;
  [[nodiscard]] int exit_status() const { return all_satisfied() ? 0 : 1; }
};

/// Runs the checks in configuration order. Check i draws from
/// RandomStream(seed, i + 1); every report carries the seed in params.
RunResult run_checks(const ExperimentConfig& config);

/// Writes reports.jsonl, summary.csv and one SVG per concentration profile
/// (profile-<k>.svg) into `dir`. Throws IoError.
void write_outputs(const RunResult& result, const std::filesystem::path& dir, const OutputSpec& output);

/// Built-in suite names with the statement each one verifies.
std::vector<std::pair<std::string, std::string>> suite_catalog();
std::string list_suites();

}  // namespace entlab
