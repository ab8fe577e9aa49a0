#pragma once

#include <span>
#include <string>
#include <vector>

#include "blrhl/gibbs.hpp"
#include "blrhl/model.hpp"

namespace blrhl {

struct FeatureRanking {
  Eigen::VectorXd sdb;           // index j-1 for feature j
  Eigen::VectorXd relative_sdb;  // sdb / max(sdb), all zero when max is 0
  std::vector<int> order;        // 1-based feature indices by descending sdb
};

enum class PredictionMode { bayes_average, plugin_mean };

std::string to_string(PredictionMode mode);
PredictionMode parse_prediction_mode(const std::string& name);

struct PredictionResult {
  Eigen::MatrixXd probs;  // n_test x C
  double amlp = 0.0;
  double error_rate = 0.0;
};

// Role of a feature in a synthetic dataset. A correlated group counts as a
// single useful unit when scoring sensitivity.
enum class FeatureGroup { x1_signal, x2_correlated_signal, corr_group, noise };

std::string to_string(FeatureGroup group);
FeatureGroup parse_feature_group(const std::string& name);

struct SelectionMetrics {
  double threshold = 0.0;
  int n_retained = 0;
  double fpr = 0.0;
  double sensitivity = 0.0;
  double fdr = 0.0;  // retained noise / max(1, retained)
};

/// Number of draws dropped from the front for a burn-in fraction.
std::size_t burnin_count(std::size_t draws, double burnin_frac);

/// Mean of the draws after the burn-in.
CoefMatrix coefficient_means(const ChainRecord& record, double burnin_frac);

FeatureRanking feature_ranking(const CoefMatrix& delta_hat, int num_classes);

/// Predictive probabilities for standardized test rows. bayes_average
/// averages class_probs over retained draws; plugin_mean evaluates them at
/// the mean coefficients.
Eigen::MatrixXd predict(const ChainRecord& record, double burnin_frac, const Eigen::MatrixXd& x_test,
                        PredictionMode mode);

/// Average minus log probability at the true labels. +inf if any is zero.
double amlp(const Eigen::MatrixXd& probs, std::span<const int> y_true);

/// Fraction of rows whose argmax (ties to the lowest class) differs from the label.
double error_rate(const Eigen::MatrixXd& probs, std::span<const int> y_true);

PredictionResult summarize_predictions(Eigen::MatrixXd probs, std::span<const int> y_true);

/// Retain features with relative SDB >= t for each threshold t and score them
/// against the truth.
std::vector<SelectionMetrics> selection_metrics(const FeatureRanking& ranking,
                                                std::span<const FeatureGroup> truth,
                                                std::span<const double> thresholds);

}  // namespace blrhl
