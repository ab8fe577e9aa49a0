#include "blrhl/sigma2.hpp"

#include <cmath>
#include <string>

#include "blrhl/errors.hpp"

namespace blrhl {

namespace {

// log(1 + e^t) without overflow.
// How far below the inner bracket point the outer ARS abscissa may sit, in log units.
constexpr double kBracketDepth = 30.0;

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void check_params(int num_k, double alpha, double w) {
  if (num_k < 1) throw ValidationError("need K >= 1");
  if (!(alpha > 0.0) || !(w > 0.0) || !std::isfinite(alpha) || !std::isfinite(w)) {
    throw ValidationError("alpha and w must be positive and finite");
  }
}

// Shared shape of both conditionals on xi:
//   linear * xi - (V/2) e^-xi - tail * softplus(xi - log(scale)).
LogConcaveTarget log_sigma2_target(double v, double linear, double tail, double log_scale) {
  const double log_half_v = std::log(0.5 * std::max(v, kMinSquaredSpread));
  LogConcaveTarget target;
  target.log_density = [=](double xi) {
    return linear * xi - std::exp(log_half_v - xi) - tail * softplus(xi - log_scale);
  };
  target.derivative = [=](double xi) {
    return linear + std::exp(log_half_v - xi) - tail * logistic(xi - log_scale);
  };
  return target;
}

}  // namespace

double sample_sigma2_ig_from_spread(double v, int num_k, double alpha, double w, Rng& rng) {
  check_params(num_k, alpha, w);
  const double shape = 0.5 * (alpha + num_k);
  const double rate = 0.5 * (alpha * w + v);
  const double s = rate / rng.gamma(shape, 1.0);
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("sigma^2 draw is not positive and finite");
  return s;
}

double sample_sigma2_ig(std::span<const double> delta_j, int num_classes, double alpha, double w,
                        Rng& rng) {
  return sample_sigma2_ig_from_spread(v_of_delta(delta_j, num_classes), num_classes - 1, alpha, w,
                                      rng);
}

LogConcaveTarget ghs_log_sigma2_target(double v, int num_k, double alpha, double w) {
  check_params(num_k, alpha, w);
  // sigma^-(K+1) kernel times the Jacobian e^xi gives slope (1 - K)/2.
  return log_sigma2_target(v, 0.5 * (1.0 - num_k), 0.5 * (alpha + 1.0), std::log(alpha * w));
}

LogConcaveTarget neg_log_sigma2_target(double v, int num_k, double alpha, double w) {
  check_params(num_k, alpha, w);
  return log_sigma2_target(v, 1.0 - 0.5 * num_k, 0.5 * alpha + 1.0, std::log(0.5 * alpha * w));
}

LogConcaveTarget sigma2_conditional_ghs(std::span<const double> delta_j, int num_classes,
                                        double alpha, double w) {
  return ghs_log_sigma2_target(v_of_delta(delta_j, num_classes), num_classes - 1, alpha, w);
}

LogConcaveTarget sigma2_conditional_neg(std::span<const double> delta_j, int num_classes,
                                        double alpha, double w) {
  return neg_log_sigma2_target(v_of_delta(delta_j, num_classes), num_classes - 1, alpha, w);
}

double sample_log_sigma2_ars(const LogConcaveTarget& target, double v, int num_k, double alpha,
                             double w, Rng& rng) {
  const double center = std::log(std::max(v, kMinSquaredSpread) / num_k + alpha * w);
  // Step outward by doubling until the derivative points back toward the mode
  // with at least half the right-tail slope (K + alpha)/2; a nearly flat
  // outer tangent gives an unbounded hull segment of absurd width. Then
  // bisect back so the outer point is not so far down the tail that the
  // tangent intersections lose precision (at V near 0 the doubling lands
  // where the log density is around -1e25).
  const double min_slope = 0.25 * (num_k + alpha);
  auto bracket = [&](double sign) {
    double inner = center;
    double outer = center + sign * 2.0;
    double step = 2.0;
    for (int i = 0; sign * target.derivative(outer) > -min_slope; ++i) {
      if (i == 64) {
        throw BracketingError(std::string("could not find a point ") + (sign < 0 ? "left" : "right") +
                              " of the sigma^2 mode");
      }
      inner = outer;
      step *= 2.0;
      outer += sign * step;
    }
    const double h_inner = target.log_density(inner);
    for (int i = 0; i < 200 && target.log_density(outer) < h_inner - kBracketDepth; ++i) {
      const double mid = 0.5 * (inner + outer);
      if (sign * target.derivative(mid) <= -min_slope) outer = mid;
      else inner = mid;
    }
    return outer;
  };
  const double left = bracket(-1.0);
  const double right = bracket(1.0);
  return ars_sample(target, {left, center, right}, rng);
}

double sample_sigma2(PriorFamily family, double v, int num_k, double alpha, double w, Rng& rng) {
  if (family == PriorFamily::t) return sample_sigma2_ig_from_spread(v, num_k, alpha, w, rng);
  const LogConcaveTarget target = family == PriorFamily::ghs
                                      ? ghs_log_sigma2_target(v, num_k, alpha, w)
                                      : neg_log_sigma2_target(v, num_k, alpha, w);
  const double s = std::exp(sample_log_sigma2_ars(target, v, num_k, alpha, w, rng));
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("sigma^2 draw is not positive and finite");
  return s;
}

LogWUpdate update_log_w(const VarianceVector& sigma2, const PriorSpec& prior, double current_log_w,
                        Rng& rng, double proposal_sd) {
  if (!(proposal_sd >= 0.0)) throw ValidationError("proposal sd must be nonnegative");
  auto log_target = [&](double log_w) {
    double total = -0.5 * log_w * log_w / kLogWPriorVariance;
    for (Eigen::Index j = 0; j < sigma2.size(); ++j) {
      total += log_prior_sigma2(sigma2[j], prior.family, prior.alpha, log_w);
    }
    return total;
  };
  const double proposal = current_log_w + proposal_sd * rng.normal();
  const double log_ratio = log_target(proposal) - log_target(current_log_w);
  const double log_u = std::log(rng.uniform());
  if (log_ratio >= 0.0 || log_u < log_ratio) return {proposal, true};
  return {current_log_w, false};
}

}  // namespace blrhl
