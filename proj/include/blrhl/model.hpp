#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace blrhl {

// Row j holds the coefficients of feature j (row 0 = intercepts), column k-1
// the contrast of class k+1 against the baseline class 1. Row-major so each
// feature's K coefficients are contiguous.
using CoefMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// sigma2[j-1] is the prior variance of feature j. The intercept variance is
// fixed and lives in PriorSpec.
using VarianceVector = Eigen::VectorXd;

// Sorted row indices into a CoefMatrix; always contains 0.
using ActiveSet = std::vector<int>;

enum class PriorFamily { t, ghs, neg };

std::string to_string(PriorFamily family);
PriorFamily parse_prior_family(const std::string& name);

// Variance of the vague normal prior on log(w) when w is sampled.
inline constexpr double kLogWPriorVariance = 100.0;

struct PriorSpec {
  PriorFamily family = PriorFamily::t;
  double alpha = 1.0;
  double log_w = -10.0;
  bool w_sampled = false;
  double sigma0_sq = 2000.0;

  double w() const;
  void validate() const;
  bool operator==(const PriorSpec&) const = default;
};

struct Dataset {
  Eigen::MatrixXd x;   // n x p
  std::vector<int> y;  // labels in 1..num_classes
  int num_classes = 2;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }
  void validate() const;
};

/// Sum of squared deviations of (0, delta_1..delta_K) from their mean.
double v_of_delta(std::span<const double> delta_j, int num_classes);

/// Standard deviation of the implicit per-class coefficients, sqrt(V / C).
double sdb(std::span<const double> delta_j, int num_classes);

inline std::span<const double> row_span(const CoefMatrix& m, Eigen::Index j) {
  return {m.data() + j * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Class probabilities P(y = 1..C | x) with class 1 as baseline.
Eigen::VectorXd class_probs(std::span<const double> x_row, const CoefMatrix& delta);

double log_likelihood(const Dataset& data, const CoefMatrix& delta);

/// Minus log of the Gaussian prior of delta given the row variances. The
/// |I_K + J_K| determinant is dropped.
double neg_log_prior_delta(const CoefMatrix& delta, const VarianceVector& sigma2,
                           const PriorSpec& prior);

/// Gradient of U = -log L - log prior. Rows outside `active` are zero.
CoefMatrix grad_u(const Dataset& data, const CoefMatrix& delta, const VarianceVector& sigma2,
                  const PriorSpec& prior, const ActiveSet& active);

/// Data-independent-of-delta estimate of the diagonal second derivatives of U.
CoefMatrix curvature_estimate(const Dataset& data, const VarianceVector& sigma2,
                              const PriorSpec& prior);

/// Normalized log density of sigma_j^2 under the chosen family.
double log_prior_sigma2(double sigma2_j, PriorFamily family, double alpha, double log_w);
double log_prior_sigma2(double sigma2_j, const PriorSpec& prior);

/// Variance of row j: sigma0^2 for the intercept, sigma2[j-1] otherwise.
inline double row_variance(const VarianceVector& sigma2, const PriorSpec& prior, Eigen::Index j) {
  return j == 0 ? prior.sigma0_sq : sigma2[j - 1];
}

/// n x (p+1) design with a leading column of ones.
Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& x);

/// Log-sum-exp of (0, eta_1..eta_K), i.e. the log normalizer of the softmax.
double log_normalizer(const Eigen::Ref<const Eigen::RowVectorXd>& eta);

/// Potential energy U restricted to an active block of rows, with the linear
/// predictor contribution of every inactive row frozen in `eta_fixed`.
///
/// The block is flattened row-major: q[a*K + k] is delta(active[a], k).
/// `row_variances` is indexed 0..p with the intercept variance at 0. The
/// labels, design and frozen predictors are referenced, not copied.
class ActiveBlockPosterior {
 public:
  ActiveBlockPosterior(const Eigen::MatrixXd& design, const std::vector<int>& labels0,
                       int num_classes, const Eigen::MatrixXd& eta_fixed, const ActiveSet& active,
                       const Eigen::VectorXd& row_variances);

  int dimension() const { return static_cast<int>(active_.size()) * num_classes_minus_1_; }

  /// U(q) up to a constant; fills grad when non-null. Returns +inf or NaN on overflow.
  double evaluate(const Eigen::VectorXd& q, Eigen::VectorXd* grad);

  double operator()(const Eigen::VectorXd& q, Eigen::VectorXd& grad) { return evaluate(q, &grad); }

  /// Linear predictors from the most recent evaluate().
  const Eigen::MatrixXd& eta() const { return eta_; }

  Eigen::VectorXd gather(const CoefMatrix& delta) const;
  void scatter(const Eigen::VectorXd& q, CoefMatrix& delta) const;

 private:
  Eigen::MatrixXd x_active_;  // n x |A|
  const std::vector<int>& labels0_;
  const Eigen::MatrixXd& eta_fixed_;
  ActiveSet active_;
  Eigen::VectorXd inv_var_;  // 1 / sigma_j^2 for active rows
  int num_classes_;
  int num_classes_minus_1_;
  Eigen::MatrixXd eta_;
  Eigen::MatrixXd resid_;
};

}  // namespace blrhl
