#include "blrhl/hmc.hpp"

#include "blrhl/errors.hpp"

namespace blrhl {

std::string to_string(StepsizeRule rule) {
  return rule == StepsizeRule::inverse ? "inverse" : "inverse_sqrt";
}

StepsizeRule parse_stepsize_rule(const std::string& name) {
  if (name == "inverse_sqrt") return StepsizeRule::inverse_sqrt;
  if (name == "inverse") return StepsizeRule::inverse;
  throw ValidationError("unknown stepsize rule '" + name + "'");
}

CoefMatrix compute_stepsizes(const CoefMatrix& curvature, double adjust, StepsizeRule rule) {
  if (!(adjust > 0.0) || !std::isfinite(adjust)) {
    throw ValidationError("stepsize adjustment must be positive");
  }
  if (!(curvature.array() > 0.0).all() || !curvature.allFinite()) {
    throw ValidationError("curvature estimates must be positive and finite");
  }
  if (rule == StepsizeRule::inverse) return (adjust / curvature.array()).matrix();
  return (adjust / curvature.array().sqrt()).matrix();
}

HmcOutcome hmc_update(const CoefMatrix& delta, const ActiveSet& active, int ell,
                      const CoefMatrix& stepsizes, ActiveBlockPosterior& posterior, Rng& rng) {
  if (ell < 1) throw ValidationError("trajectory length must be at least 1");
  if (active.empty() || active.front() != 0) {
    throw ValidationError("active set must contain the intercept row 0");
  }
  if (stepsizes.rows() != delta.rows() || stepsizes.cols() != delta.cols()) {
    throw ValidationError("stepsize matrix shape does not match delta");
  }
  if (posterior.dimension() != static_cast<int>(active.size() * delta.cols())) {
    throw ValidationError("posterior block does not match the active set");
  }

  const Eigen::VectorXd q0 = posterior.gather(delta);
  Eigen::VectorXd eps(q0.size());
  const Eigen::Index num_k = delta.cols();
  for (std::size_t a = 0; a < active.size(); ++a) {
    eps.segment(static_cast<Eigen::Index>(a) * num_k, num_k) = stepsizes.row(active[a]).transpose();
  }

  HmcResult step = hmc_step(q0, eps, ell, posterior, rng);

  HmcOutcome out;
  out.new_delta = delta;
  out.accepted = step.accepted;
  out.divergent = step.divergent;
  out.hamiltonian_delta = step.hamiltonian_delta;
  out.trajectory_length = step.trajectory_length;
  out.potential = step.potential;
  if (step.accepted) posterior.scatter(step.q, out.new_delta);
  return out;
}

}  // namespace blrhl
