#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "blrhl/model.hpp"
#include "blrhl/rng.hpp"

namespace blrhl {

// inverse_sqrt: adjust / sqrt(curvature). inverse: adjust / curvature, kept
// only for comparison runs.
enum class StepsizeRule { inverse_sqrt, inverse };

std::string to_string(StepsizeRule rule);
StepsizeRule parse_stepsize_rule(const std::string& name);

CoefMatrix compute_stepsizes(const CoefMatrix& curvature, double adjust,
                             StepsizeRule rule = StepsizeRule::inverse_sqrt);

/// One leapfrog step with a separate stepsize per coordinate.
///
/// `grad` must hold dU/dq at q on entry; it holds dU/dq at the new q on exit.
/// `grad_fn(q, g)` writes the gradient into g (any return value is ignored).
/// Returns false if the new state is not finite.
template <class GradFn>
bool leapfrog(Eigen::VectorXd& q, Eigen::VectorXd& p_mom, const Eigen::VectorXd& eps,
              GradFn&& grad_fn, Eigen::VectorXd& grad) {
  p_mom -= 0.5 * eps.cwiseProduct(grad);
  q += eps.cwiseProduct(p_mom);
  grad_fn(q, grad);
  p_mom -= 0.5 * eps.cwiseProduct(grad);
  return q.allFinite() && p_mom.allFinite();
}

template <class GradFn>
bool leapfrog(Eigen::VectorXd& q, Eigen::VectorXd& p_mom, const Eigen::VectorXd& eps,
              GradFn&& grad_fn) {
  Eigen::VectorXd grad(q.size());
  grad_fn(q, grad);
  return leapfrog(q, p_mom, eps, grad_fn, grad);
}

struct HmcResult {
  Eigen::VectorXd q;
  double potential = 0.0;  // U at the returned q
  bool accepted = false;
  bool divergent = false;
  double hamiltonian_delta = 0.0;  // H(q*, p*) - H(q, -p); +inf when divergent
  int trajectory_length = 0;
};

/// One HMC transition on a generic potential. `potential(q, g)` returns U(q)
/// and writes dU/dq into g; `u0` and `grad0` are its values at q0.
template <class Potential>
HmcResult hmc_step(const Eigen::VectorXd& q0, double u0, const Eigen::VectorXd& grad0,
                   const Eigen::VectorXd& eps, int ell, Potential&& potential, Rng& rng) {
  const Eigen::Index d = q0.size();
  Eigen::VectorXd p_mom(d);
  for (Eigen::Index i = 0; i < d; ++i) p_mom[i] = rng.normal();
  const double h0 = u0 + 0.5 * p_mom.squaredNorm();

  Eigen::VectorXd q = q0;
  Eigen::VectorXd grad = grad0;
  double u = u0;
  HmcResult out;
  for (int step = 0; step < ell; ++step) {
    p_mom -= 0.5 * eps.cwiseProduct(grad);
    q += eps.cwiseProduct(p_mom);
    u = potential(q, grad);
    p_mom -= 0.5 * eps.cwiseProduct(grad);
    ++out.trajectory_length;
    if (!std::isfinite(u) || !q.allFinite() || !p_mom.allFinite() || !grad.allFinite()) {
      out.divergent = true;
      break;
    }
  }

  // Always consume one uniform so the stream does not depend on the outcome.
  const double log_u = std::log(rng.uniform());
  if (out.divergent) {
    out.hamiltonian_delta = std::numeric_limits<double>::infinity();
  } else {
    out.hamiltonian_delta = (u + 0.5 * p_mom.squaredNorm()) - h0;
    out.accepted = out.hamiltonian_delta <= 0.0 || log_u < -out.hamiltonian_delta;
  }
  if (out.accepted) {
    out.q = std::move(q);
    out.potential = u;
  } else {
    out.q = q0;
    out.potential = u0;
  }
  return out;
}

template <class Potential>
HmcResult hmc_step(const Eigen::VectorXd& q0, const Eigen::VectorXd& eps, int ell,
                   Potential&& potential, Rng& rng) {
  Eigen::VectorXd grad0(q0.size());
  const double u0 = potential(q0, grad0);
  return hmc_step(q0, u0, grad0, eps, ell, potential, rng);
}

struct HmcOutcome {
  CoefMatrix new_delta;
  bool accepted = false;
  bool divergent = false;
  double hamiltonian_delta = 0.0;
  int trajectory_length = 0;
  double potential = 0.0;  // restricted U at new_delta
};

/// HMC update of the active rows of delta. Inactive rows are copied through
/// untouched. On acceptance `posterior.eta()` holds the predictors of new_delta.
HmcOutcome hmc_update(const CoefMatrix& delta, const ActiveSet& active, int ell,
                      const CoefMatrix& stepsizes, ActiveBlockPosterior& posterior, Rng& rng);

}  // namespace blrhl
