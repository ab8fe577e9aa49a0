#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blrhl/inference.hpp"
#include "blrhl/simgen.hpp"
#include "blrhl/workflow.hpp"

namespace blrhl::cli {

/// Everything a subcommand needs. Each command reads the subset it uses.
///
/// `seed` drives both the generator and the chain. Paths are left empty when
/// not set; `out` falls back to $BLRHL_OUT_DIR and then "out".
struct RunConfig {
  PriorSpec prior;
  SamplerSettings settings;
  double burnin_frac = 0.2;
  PredictionMode mode = PredictionMode::bayes_average;

  GeneratorVariant variant = GeneratorVariant::two_class;
  int n_train = 100;
  int n_test = 1000;
  int p = 200;

  std::string train;
  std::string test;
  std::string data;
  std::string chain;
  std::string truth;  // feature,group file; rank scores selection against it
  std::string out;

  std::vector<double> grid;
  std::vector<double> thresholds{0.1};
  std::vector<int> features;  // 1-based subset; empty = all
  int jobs = 1;

  FitConfig fit_config() const;
  GeneratorSpec generator_spec() const;
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Apply one `key = value` setting. Unknown keys and bad values throw
/// ValidationError.
void set_key(RunConfig& config, const std::string& key, const std::string& value);

/// Every key in a fixed order, values formatted to round-trip exactly.
KeyValues to_key_values(const RunConfig& config);

/// Flat config file: `key = value` per line, `#` starts a comment.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});
std::string to_config_text(const RunConfig& config);

nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);

/// Expand "from:to:points" into an evenly spaced grid.
std::vector<double> grid_range(double from, double to, int points);

std::string default_out_dir();

}  // namespace blrhl::cli
