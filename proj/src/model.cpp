#include "blrhl/model.hpp"

#include <cmath>
#include <numbers>

#include "blrhl/errors.hpp"

namespace blrhl {

std::string to_string(PriorFamily family) {
  switch (family) {
    case PriorFamily::t: return "t";
    case PriorFamily::ghs: return "ghs";
    case PriorFamily::neg: return "neg";
  }
  return "t";
}

PriorFamily parse_prior_family(const std::string& name) {
  if (name == "t") return PriorFamily::t;
  if (name == "ghs") return PriorFamily::ghs;
  if (name == "neg") return PriorFamily::neg;
  throw ValidationError("unknown prior family '" + name + "' (expected t, ghs or neg)");
}

double PriorSpec::w() const { return std::exp(log_w); }

void PriorSpec::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be positive");
  if (!std::isfinite(log_w)) throw ValidationError("log_w must be finite");
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) {
    throw ValidationError("sigma0_sq must be positive");
  }
}

void Dataset::validate() const {
  if (num_classes < 2) throw ValidationError("need at least two classes");
  if (x.rows() < 1 || x.cols() < 1) throw ValidationError("dataset needs n >= 1 and p >= 1");
  if (static_cast<Eigen::Index>(y.size()) != x.rows()) {
    throw ValidationError("label count does not match the number of rows");
  }
  for (int label : y) {
    if (label < 1 || label > num_classes) {
      throw ValidationError("label " + std::to_string(label) + " outside 1.." +
                            std::to_string(num_classes));
    }
  }
  if (!x.allFinite()) throw ValidationError("feature matrix contains non-finite values");
}

namespace {

void check_row(std::span<const double> delta_j, int num_classes) {
  if (num_classes < 2 || static_cast<int>(delta_j.size()) != num_classes - 1) {
    throw ValidationError("coefficient row length must equal C - 1");
  }
  for (double d : delta_j) {
    if (!std::isfinite(d)) throw ValidationError("non-finite coefficient");
  }
}

}  // namespace

double v_of_delta(std::span<const double> delta_j, int num_classes) {
  check_row(delta_j, num_classes);
  double sum = 0.0, sum_sq = 0.0;
  for (double d : delta_j) {
    sum += d;
    sum_sq += d * d;
  }
  // Clamp the tiny negative values cancellation can produce.
  return std::max(0.0, sum_sq - sum * sum / num_classes);
}

double sdb(std::span<const double> delta_j, int num_classes) {
  return std::sqrt(v_of_delta(delta_j, num_classes) / num_classes);
}

double log_normalizer(const Eigen::Ref<const Eigen::RowVectorXd>& eta) {
  const double m = std::max(0.0, eta.maxCoeff());
  return m + std::log(std::exp(-m) + (eta.array() - m).exp().sum());
}

Eigen::VectorXd class_probs(std::span<const double> x_row, const CoefMatrix& delta) {
  const Eigen::Index p = delta.rows() - 1;
  const Eigen::Index num_k = delta.cols();
  if (static_cast<Eigen::Index>(x_row.size()) != p) {
    throw ValidationError("feature row length does not match coefficient rows");
  }
  Eigen::RowVectorXd eta = delta.row(0);
  for (Eigen::Index j = 0; j < p; ++j) eta += x_row[j] * delta.row(j + 1);
  if (!eta.allFinite()) throw NumericError("non-finite linear predictor");

  const double m = std::max(0.0, eta.maxCoeff());
  Eigen::VectorXd probs(num_k + 1);
  probs[0] = std::exp(-m);
  for (Eigen::Index k = 0; k < num_k; ++k) probs[k + 1] = std::exp(eta[k] - m);
  probs /= probs.sum();
  return probs;
}

double log_likelihood(const Dataset& data, const CoefMatrix& delta) {
  if (delta.rows() != data.p() + 1 || delta.cols() != data.num_classes - 1) {
    throw ValidationError("coefficient matrix shape does not match the dataset");
  }
  const Eigen::MatrixXd eta =
      (data.x * delta.bottomRows(data.p())).rowwise() + delta.row(0);
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    total -= log_normalizer(eta.row(i));
    if (data.y[i] > 1) total += eta(i, data.y[i] - 2);
  }
  return total;
}

double neg_log_prior_delta(const CoefMatrix& delta, const VarianceVector& sigma2,
                           const PriorSpec& prior) {
  if (sigma2.size() != delta.rows() - 1) {
    throw ValidationError("variance vector length must equal the number of features");
  }
  const int num_classes = static_cast<int>(delta.cols()) + 1;
  const double half_k = 0.5 * static_cast<double>(delta.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < delta.rows(); ++j) {
    const double var = row_variance(sigma2, prior, j);
    if (!(var > 0.0)) throw ValidationError("row variance must be positive");
    total += half_k * std::log(2.0 * std::numbers::pi * var) +
             v_of_delta(row_span(delta, j), num_classes) / (2.0 * var);
  }
  return total;
}

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

CoefMatrix grad_u(const Dataset& data, const CoefMatrix& delta, const VarianceVector& sigma2,
                  const PriorSpec& prior, const ActiveSet& active) {
  if (delta.rows() != data.p() + 1 || delta.cols() != data.num_classes - 1 ||
      sigma2.size() != data.p()) {
    throw ValidationError("grad_u: dimension mismatch");
  }
  if (active.empty() || active.front() != 0) {
    throw ValidationError("active set must contain the intercept row 0");
  }
  const Eigen::Index num_k = delta.cols();
  const Eigen::MatrixXd eta =
      (data.x * delta.bottomRows(data.p())).rowwise() + delta.row(0);
  Eigen::MatrixXd resid(data.n(), num_k);
  for (int i = 0; i < data.n(); ++i) {
    const double lse = log_normalizer(eta.row(i));
    for (Eigen::Index k = 0; k < num_k; ++k) {
      resid(i, k) = std::exp(eta(i, k) - lse) - (data.y[i] == k + 2 ? 1.0 : 0.0);
    }
  }

  CoefMatrix grad = CoefMatrix::Zero(delta.rows(), num_k);
  const double inv_c = 1.0 / static_cast<double>(num_k + 1);
  for (int j : active) {
    if (j < 0 || j > data.p()) throw ValidationError("active index out of range");
    if (j == 0) {
      grad.row(0) = resid.colwise().sum();
    } else {
      grad.row(j) = data.x.col(j - 1).transpose() * resid;
    }
    const double var = row_variance(sigma2, prior, j);
    const double mean_part = delta.row(j).sum() * inv_c;
    grad.row(j) += (delta.row(j).array() - mean_part).matrix() / var;
  }
  return grad;
}

CoefMatrix curvature_estimate(const Dataset& data, const VarianceVector& sigma2,
                              const PriorSpec& prior) {
  const Eigen::Index num_k = data.num_classes - 1;
  const double prior_factor =
      static_cast<double>(data.num_classes - 1) / static_cast<double>(data.num_classes);
  CoefMatrix curv(data.p() + 1, num_k);
  for (Eigen::Index j = 0; j <= data.p(); ++j) {
    const double lik = j == 0 ? data.n() / 4.0 : data.x.col(j - 1).squaredNorm() / 4.0;
    curv.row(j).setConstant(lik + prior_factor / row_variance(sigma2, prior, j));
  }
  return curv;
}

double log_prior_sigma2(double s, PriorFamily family, double alpha, double log_w) {
  if (!(s > 0.0)) throw ValidationError("sigma^2 must be positive");
  const double w = std::exp(log_w);
  const double log_s = std::log(s);
  switch (family) {
    case PriorFamily::t: {
      // IG(alpha/2, alpha*w/2), rate parameterization.
      const double a = 0.5 * alpha;
      const double b = 0.5 * alpha * w;
      return a * std::log(b) - std::lgamma(a) - (a + 1.0) * log_s - b / s;
    }
    case PriorFamily::ghs: {
      // Induced by a half-t(alpha) prior with scale sqrt(w) on sigma_j.
      return std::lgamma(0.5 * (alpha + 1.0)) - std::lgamma(0.5 * alpha) -
             0.5 * std::log(alpha * std::numbers::pi) - 0.5 * log_w -
             0.5 * (alpha + 1.0) * std::log1p(s / (alpha * w)) - 0.5 * log_s;
    }
    case PriorFamily::neg: {
      // Exponential mixed over an IG mean: kappa/lambda (1 + s/lambda)^-(kappa+1).
      const double kappa = 0.5 * alpha;
      const double lambda = 0.5 * alpha * w;
      return std::log(kappa / lambda) - (kappa + 1.0) * std::log1p(s / lambda);
    }
  }
  return 0.0;
}

double log_prior_sigma2(double s, const PriorSpec& prior) {
  return log_prior_sigma2(s, prior.family, prior.alpha, prior.log_w);
}

ActiveBlockPosterior::ActiveBlockPosterior(const Eigen::MatrixXd& design,
                                           const std::vector<int>& labels0, int num_classes,
                                           const Eigen::MatrixXd& eta_fixed,
                                           const ActiveSet& active,
                                           const Eigen::VectorXd& row_variances)
    : x_active_(design.rows(), static_cast<Eigen::Index>(active.size())),
      labels0_(labels0),
      eta_fixed_(eta_fixed),
      active_(active),
      inv_var_(static_cast<Eigen::Index>(active.size())),
      num_classes_(num_classes),
      num_classes_minus_1_(num_classes - 1),
      eta_(design.rows(), num_classes - 1),
      resid_(design.rows(), num_classes - 1) {
  for (std::size_t a = 0; a < active.size(); ++a) {
    x_active_.col(static_cast<Eigen::Index>(a)) = design.col(active[a]);
    inv_var_[static_cast<Eigen::Index>(a)] = 1.0 / row_variances[active[a]];
  }
}

double ActiveBlockPosterior::evaluate(const Eigen::VectorXd& q, Eigen::VectorXd* grad) {
  const auto rows = static_cast<Eigen::Index>(active_.size());
  const Eigen::Index num_k = num_classes_minus_1_;
  Eigen::Map<const CoefMatrix> block(q.data(), rows, num_k);

  eta_.noalias() = x_active_ * block;
  eta_ += eta_fixed_;

  double value = 0.0;
  for (Eigen::Index i = 0; i < eta_.rows(); ++i) {
    const double lse = log_normalizer(eta_.row(i));
    const int label = labels0_[i];
    value += lse;
    if (label > 0) value -= eta_(i, label - 1);
    for (Eigen::Index k = 0; k < num_k; ++k) {
      resid_(i, k) = std::exp(eta_(i, k) - lse) - (label == k + 1 ? 1.0 : 0.0);
    }
  }

  const double inv_c = 1.0 / num_classes_;
  for (Eigen::Index a = 0; a < rows; ++a) {
    const double sum = block.row(a).sum();
    value += 0.5 * inv_var_[a] * std::max(0.0, block.row(a).squaredNorm() - sum * sum * inv_c);
  }

  if (grad != nullptr) {
    grad->resize(q.size());
    Eigen::Map<CoefMatrix> g(grad->data(), rows, num_k);
    g.noalias() = x_active_.transpose() * resid_;
    for (Eigen::Index a = 0; a < rows; ++a) {
      const double mean_part = block.row(a).sum() * inv_c;
      g.row(a) += inv_var_[a] * (block.row(a).array() - mean_part).matrix();
    }
  }
  return value;
}

Eigen::VectorXd ActiveBlockPosterior::gather(const CoefMatrix& delta) const {
  const Eigen::Index num_k = num_classes_minus_1_;
  Eigen::VectorXd q(dimension());
  for (std::size_t a = 0; a < active_.size(); ++a) {
    q.segment(static_cast<Eigen::Index>(a) * num_k, num_k) = delta.row(active_[a]).transpose();
  }
  return q;
}

void ActiveBlockPosterior::scatter(const Eigen::VectorXd& q, CoefMatrix& delta) const {
  const Eigen::Index num_k = num_classes_minus_1_;
  for (std::size_t a = 0; a < active_.size(); ++a) {
    delta.row(active_[a]) = q.segment(static_cast<Eigen::Index>(a) * num_k, num_k).transpose();
  }
}

}  // namespace blrhl
