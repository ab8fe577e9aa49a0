#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blrhl/gibbs.hpp"
#include "blrhl/inference.hpp"
#include "blrhl/preprocess.hpp"

namespace blrhl {

struct FitConfig {
  PriorSpec prior;
  SamplerSettings settings;
  double burnin_frac = 0.2;
  PredictionMode mode = PredictionMode::bayes_average;

  void validate() const;
};

struct FitResult {
  StandardizeTransform transform;
  ChainRecord record;
  CoefMatrix delta_hat;
  FeatureRanking ranking;
  std::optional<PredictionResult> test;  // present when a test set was given
};

/// Standardize on train, run one chain, summarize, and score the test set.
FitResult fit_and_predict(const Dataset& train, const Dataset* test, const FitConfig& config,
                          ChainObserver* observer = nullptr);

/// Run fn(0..count-1) on up to `jobs` threads. The first exception thrown by
/// any task is rethrown after all threads finish.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

struct LoocvFold {
  int index = 0;            // 0-based held-out row
  bool failed = false;
  std::string message;      // why the fold failed
  Eigen::RowVectorXd probs; // held-out predictive probabilities when not failed
};

struct LoocvResult {
  std::vector<LoocvFold> folds;
  int n_failed = 0;
  // Over the folds that succeeded; absent when none did.
  std::optional<PredictionResult> summary;
};

/// Leave-one-out: each fold standardizes on the other n-1 cases and runs its
/// own chain with seed = settings.seed + fold index.
LoocvResult loocv_driver(const Dataset& data, const FitConfig& config, int jobs = 1);

struct SweepPoint {
  double log_w = 0.0;
  std::uint64_t seed = 0;
  CoefMatrix delta_hat;
  FeatureRanking ranking;
  std::optional<PredictionResult> test;
};

/// Called from a worker thread once a grid point is done.
using SweepCallback = std::function<void(int index, const SweepPoint&, const FitResult&)>;

/// One independent chain per log(w) value, seeded settings.seed + index.
std::vector<SweepPoint> scale_sweep(const Dataset& train, const Dataset* test, const FitConfig& base,
                                    const std::vector<double>& log_w_grid, int jobs = 1,
                                    const SweepCallback& on_point = {});

}  // namespace blrhl
