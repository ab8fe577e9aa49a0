#pragma once

#include <span>

#include "blrhl/ars.hpp"
#include "blrhl/model.hpp"
#include "blrhl/rng.hpp"

namespace blrhl {

// V below this is treated as this value in the log(sigma^2) conditionals;
// at V = 0 some of them are improper on the left.
inline constexpr double kMinSquaredSpread = 1e-200;

/// Conjugate draw of sigma_j^2 under the t prior: IG((alpha+K)/2, (alpha*w + V)/2).
double sample_sigma2_ig(std::span<const double> delta_j, int num_classes, double alpha, double w,
                        Rng& rng);
double sample_sigma2_ig_from_spread(double v, int num_k, double alpha, double w, Rng& rng);

/// Conditional density of xi = log(sigma_j^2) under the GHS prior, Jacobian included.
LogConcaveTarget sigma2_conditional_ghs(std::span<const double> delta_j, int num_classes,
                                        double alpha, double w);
/// Same under the NEG prior.
LogConcaveTarget sigma2_conditional_neg(std::span<const double> delta_j, int num_classes,
                                        double alpha, double w);

LogConcaveTarget ghs_log_sigma2_target(double v, int num_k, double alpha, double w);
LogConcaveTarget neg_log_sigma2_target(double v, int num_k, double alpha, double w);

/// ARS draw of xi from a log(sigma^2) conditional. Starts at
/// {xi0 - 2, xi0, xi0 + 2} with xi0 = log(V/K + alpha*w) and doubles the
/// outer steps until the mode is enclosed.
double sample_log_sigma2_ars(const LogConcaveTarget& target, double v, int num_k, double alpha,
                             double w, Rng& rng);

/// Draw sigma_j^2 from its full conditional under the given prior family.
double sample_sigma2(PriorFamily family, double v, int num_k, double alpha, double w, Rng& rng);

struct LogWUpdate {
  double log_w = 0.0;
  bool accepted = false;
};

inline constexpr double kLogWProposalSd = 0.3;

/// Random-walk Metropolis step on log(w) targeting prod_j p(sigma_j^2 | alpha, w)
/// times a N(0, 100) prior on log(w).
LogWUpdate update_log_w(const VarianceVector& sigma2, const PriorSpec& prior, double current_log_w,
                        Rng& rng, double proposal_sd = kLogWProposalSd);

}  // namespace blrhl
