#pragma once

#include <string>

#include <json.hpp>

#include "blrhl/cli/config.hpp"

namespace blrhl::cli {

// Each command reads its inputs from the config and writes into
// output_dir(config). Errors surface as ValidationError or NumericError.

/// train.csv, test.csv, truth.csv and manifest.json from the generator.
void cmd_gen(const RunConfig& config);
/// Standardize `train`, run one chain, write a chain directory.
void cmd_fit(const RunConfig& config);
/// Re-read a chain directory and write summary.json into `out`.
nlohmann::ordered_json cmd_fit_summarize(const std::string& chain_dir, const RunConfig& config);
/// ranking.csv from the chain in `chain`.
void cmd_rank(const RunConfig& config);
/// predictions.csv and metrics.json for `test` under the chain in `chain`.
void cmd_predict(const RunConfig& config);
/// paths.csv plus one chain directory per grid point.
void cmd_sweep(const RunConfig& config);
/// loocv_metrics.json, loocv_predictions.csv and manifest.json for `data`.
void cmd_loocv(const RunConfig& config);

std::string output_dir(const RunConfig& config);

/// Command-line entry point. Returns the process exit code: 0 success,
/// 1 validation error, 2 numeric or runtime failure.
int run_cli(int argc, char** argv);

}  // namespace blrhl::cli
