#include "blrhl/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "blrhl/errors.hpp"

namespace blrhl {

std::string to_string(PredictionMode mode) {
  return mode == PredictionMode::plugin_mean ? "plugin_mean" : "bayes_average";
}

PredictionMode parse_prediction_mode(const std::string& name) {
  if (name == "bayes_average") return PredictionMode::bayes_average;
  if (name == "plugin_mean") return PredictionMode::plugin_mean;
  throw ValidationError("unknown prediction mode '" + name + "'");
}

std::string to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::x1_signal: return "x1_signal";
    case FeatureGroup::x2_correlated_signal: return "x2_correlated_signal";
    case FeatureGroup::corr_group: return "corr_group";
    case FeatureGroup::noise: return "noise";
  }
  return "noise";
}

FeatureGroup parse_feature_group(const std::string& name) {
  if (name == "x1_signal") return FeatureGroup::x1_signal;
  if (name == "x2_correlated_signal") return FeatureGroup::x2_correlated_signal;
  if (name == "corr_group") return FeatureGroup::corr_group;
  if (name == "noise") return FeatureGroup::noise;
  throw ValidationError("unknown feature group '" + name + "'");
}

std::size_t burnin_count(std::size_t draws, double burnin_frac) {
  if (!(burnin_frac >= 0.0 && burnin_frac < 1.0)) {
    throw ValidationError("burnin_frac must be in [0, 1)");
  }
  return static_cast<std::size_t>(std::floor(burnin_frac * static_cast<double>(draws)));
}

CoefMatrix coefficient_means(const ChainRecord& record, double burnin_frac) {
  const std::size_t first = burnin_count(record.delta_draws.size(), burnin_frac);
  if (first >= record.delta_draws.size()) throw ValidationError("no draws left after burn-in");
  CoefMatrix sum = CoefMatrix::Zero(record.delta_draws[first].rows(), record.delta_draws[first].cols());
  for (std::size_t d = first; d < record.delta_draws.size(); ++d) sum += record.delta_draws[d];
  return sum / static_cast<double>(record.delta_draws.size() - first);
}

FeatureRanking feature_ranking(const CoefMatrix& delta_hat, int num_classes) {
  const Eigen::Index p = delta_hat.rows() - 1;
  FeatureRanking ranking;
  ranking.sdb.resize(p);
  for (Eigen::Index j = 1; j <= p; ++j) ranking.sdb[j - 1] = sdb(row_span(delta_hat, j), num_classes);
  const double top = p > 0 ? ranking.sdb.maxCoeff() : 0.0;
  ranking.relative_sdb = top > 0.0 ? Eigen::VectorXd(ranking.sdb / top) : Eigen::VectorXd::Zero(p);
  ranking.order.resize(static_cast<std::size_t>(p));
  std::iota(ranking.order.begin(), ranking.order.end(), 1);
  std::stable_sort(ranking.order.begin(), ranking.order.end(),
                   [&](int a, int b) { return ranking.sdb[a - 1] > ranking.sdb[b - 1]; });
  return ranking;
}

Eigen::MatrixXd predict(const ChainRecord& record, double burnin_frac, const Eigen::MatrixXd& x_test,
                        PredictionMode mode) {
  const std::size_t first = burnin_count(record.delta_draws.size(), burnin_frac);
  if (first >= record.delta_draws.size()) throw ValidationError("no draws left after burn-in");
  const CoefMatrix& shape = record.delta_draws[first];
  if (x_test.cols() != shape.rows() - 1) {
    throw ValidationError("test feature count does not match the chain");
  }
  const Eigen::Index num_c = shape.cols() + 1;
  const Eigen::MatrixXd design = design_matrix(x_test);

  auto probs_at = [&](const CoefMatrix& delta) {
    const Eigen::MatrixXd eta = design * delta;
    Eigen::MatrixXd probs(eta.rows(), num_c);
    for (Eigen::Index i = 0; i < eta.rows(); ++i) {
      if (!eta.row(i).allFinite()) throw NumericError("non-finite linear predictor");
      const double lse = log_normalizer(eta.row(i));
      probs(i, 0) = std::exp(-lse);
      for (Eigen::Index k = 1; k < num_c; ++k) probs(i, k) = std::exp(eta(i, k - 1) - lse);
    }
    return probs;
  };

  if (mode == PredictionMode::plugin_mean) return probs_at(coefficient_means(record, burnin_frac));

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(x_test.rows(), num_c);
  for (std::size_t d = first; d < record.delta_draws.size(); ++d) sum += probs_at(record.delta_draws[d]);
  return sum / static_cast<double>(record.delta_draws.size() - first);
}

namespace {

void check_alignment(const Eigen::MatrixXd& probs, std::span<const int> y_true) {
  if (static_cast<Eigen::Index>(y_true.size()) != probs.rows()) {
    throw ValidationError("label count does not match prediction rows");
  }
  for (int label : y_true) {
    if (label < 1 || label > probs.cols()) throw ValidationError("label outside 1..C");
  }
}

}  // namespace

double amlp(const Eigen::MatrixXd& probs, std::span<const int> y_true) {
  check_alignment(probs, y_true);
  if (y_true.empty()) throw ValidationError("amlp of an empty set");
  double total = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double prob = probs(static_cast<Eigen::Index>(i), y_true[i] - 1);
    if (!(prob > 0.0)) return std::numeric_limits<double>::infinity();
    total -= std::log(prob);
  }
  return total / static_cast<double>(y_true.size());
}

double error_rate(const Eigen::MatrixXd& probs, std::span<const int> y_true) {
  check_alignment(probs, y_true);
  if (y_true.empty()) throw ValidationError("error rate of an empty set");
  int wrong = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    Eigen::Index best = 0;
    probs.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);  // first maximum wins ties
    if (best + 1 != y_true[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(y_true.size());
}

PredictionResult summarize_predictions(Eigen::MatrixXd probs, std::span<const int> y_true) {
  PredictionResult result;
  result.amlp = amlp(probs, y_true);
  result.error_rate = error_rate(probs, y_true);
  result.probs = std::move(probs);
  return result;
}

std::vector<SelectionMetrics> selection_metrics(const FeatureRanking& ranking,
                                                std::span<const FeatureGroup> truth,
                                                std::span<const double> thresholds) {
  if (truth.empty()) throw ValidationError("empty truth labeling");
  if (static_cast<Eigen::Index>(truth.size()) != ranking.relative_sdb.size()) {
    throw ValidationError("truth labeling length does not match the ranking");
  }
  int total_noise = 0;
  int singleton_units = 0;
  bool has_group = false;
  for (FeatureGroup g : truth) {
    if (g == FeatureGroup::noise) ++total_noise;
    else if (g == FeatureGroup::corr_group) has_group = true;
    else ++singleton_units;
  }
  const int total_units = singleton_units + (has_group ? 1 : 0);

  std::vector<SelectionMetrics> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    SelectionMetrics m;
    m.threshold = t;
    int retained_noise = 0;
    int detected = 0;
    bool group_hit = false;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (ranking.relative_sdb[static_cast<Eigen::Index>(j)] < t) continue;
      ++m.n_retained;
      switch (truth[j]) {
        case FeatureGroup::noise: ++retained_noise; break;
        case FeatureGroup::corr_group: group_hit = true; break;
        default: ++detected; break;
      }
    }
    if (group_hit) ++detected;
    m.fpr = total_noise > 0 ? static_cast<double>(retained_noise) / total_noise : 0.0;
    m.sensitivity = total_units > 0 ? static_cast<double>(detected) / total_units : 0.0;
    m.fdr = static_cast<double>(retained_noise) / std::max(1, m.n_retained);
    out.push_back(m);
  }
  return out;
}

}  // namespace blrhl
