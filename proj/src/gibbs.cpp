#include "blrhl/gibbs.hpp"

#include <cmath>
#include <string>

#include "blrhl/errors.hpp"
#include "blrhl/sigma2.hpp"

namespace blrhl {

namespace {

// Predictors are recomputed from scratch this often to stop the frozen-part
// bookkeeping from accumulating rounding error.
constexpr int kEtaRefreshInterval = 256;

}  // namespace

void SamplerSettings::validate() const {
  if (n1 < 0 || n2 < 0) throw ValidationError("n1 and n2 must be nonnegative");
  if (ell1 < 1 || ell2 < 1) throw ValidationError("trajectory lengths must be at least 1");
  if (thin < 1) throw ValidationError("thin must be at least 1");
  if (!(adjust > 0.0) || !std::isfinite(adjust)) throw ValidationError("eps must be positive");
  if (!(zeta >= 0.0)) throw ValidationError("zeta must be nonnegative");
}

CoefMatrix init_delta(const Dataset& data, const PriorSpec& prior) {
  data.validate();
  prior.validate();
  const int n = data.n();
  const int p = data.p();
  const int num_c = data.num_classes;

  std::vector<int> counts(num_c, 0);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(p, num_c);
  for (int i = 0; i < n; ++i) {
    const int c = data.y[i] - 1;
    ++counts[c];
    means.col(c) += data.x.row(i).transpose();
  }
  for (int c = 0; c < num_c; ++c) {
    if (counts[c] == 0) {
      throw ValidationError("class " + std::to_string(c + 1) + " has no training cases");
    }
    means.col(c) /= counts[c];
  }

  Eigen::MatrixXd centered(n, p);
  for (int i = 0; i < n; ++i) centered.row(i) = data.x.row(i) - means.col(data.y[i] - 1).transpose();
  const double denom = std::max(1, n - num_c);

  // Sigma^-1 (m_c) for every class mean.
  Eigen::MatrixXd solved(p, num_c);
  if (p < n) {
    Eigen::MatrixXd cov = 0.5 * (centered.transpose() * centered) / denom;
    cov.diagonal().array() += 0.5;
    solved = cov.ldlt().solve(means);
  } else {
    const Eigen::VectorXd var =
        0.5 * centered.colwise().squaredNorm().transpose().array() / denom + 0.5;
    solved = means.array().colwise() / var.array();
  }

  CoefMatrix delta(p + 1, num_c - 1);
  const double base_quad = means.col(0).dot(solved.col(0));
  for (int k = 1; k < num_c; ++k) {
    delta.block(1, k - 1, p, 1) = solved.col(k) - solved.col(0);
    delta(0, k - 1) = -0.5 * (means.col(k).dot(solved.col(k)) - base_quad) +
                      std::log(static_cast<double>(counts[k]) / counts[0]);
  }
  return delta;
}

VarianceVector init_sigma2(const CoefMatrix& delta, const PriorSpec& prior) {
  const int num_classes = static_cast<int>(delta.cols()) + 1;
  const double w = prior.w();
  VarianceVector sigma2(delta.rows() - 1);
  for (Eigen::Index j = 1; j < delta.rows(); ++j) {
    sigma2[j - 1] =
        std::max(v_of_delta(row_span(delta, j), num_classes) / static_cast<double>(delta.cols()), w);
  }
  return sigma2;
}

ActiveSet active_set(const VarianceVector& sigma2, double zeta) {
  ActiveSet active{0};
  for (Eigen::Index j = 0; j < sigma2.size(); ++j) {
    if (std::sqrt(sigma2[j]) > zeta) active.push_back(static_cast<int>(j) + 1);
  }
  return active;
}

GibbsSampler::GibbsSampler(const Dataset& data, const PriorSpec& prior,
                           const SamplerSettings& settings)
    : data_(data), prior_(prior), settings_(settings), design_(design_matrix(data.x)) {
  data.validate();
  prior.validate();
  settings.validate();
  likelihood_curvature_.resize(data.p() + 1);
  likelihood_curvature_[0] = data.n() / 4.0;
  for (int j = 1; j <= data.p(); ++j) {
    likelihood_curvature_[j] = data.x.col(j - 1).squaredNorm() / 4.0;
  }
  labels0_.reserve(data.y.size());
  for (int label : data.y) labels0_.push_back(label - 1);
}

ChainState GibbsSampler::initial_state() const {
  ChainState state;
  state.delta = init_delta(data_, prior_);
  state.sigma2 = init_sigma2(state.delta, prior_);
  state.log_w = prior_.log_w;
  state.eta = design_ * state.delta;
  return state;
}

double GibbsSampler::potential(const ChainState& state) const {
  double neg_log_lik = 0.0;
  for (Eigen::Index i = 0; i < state.eta.rows(); ++i) {
    neg_log_lik += log_normalizer(state.eta.row(i));
    if (labels0_[i] > 0) neg_log_lik -= state.eta(i, labels0_[i] - 1);
  }
  return neg_log_lik + neg_log_prior_delta(state.delta, state.sigma2, prior_);
}

SweepDiagnostics GibbsSampler::update_coefficients(ChainState& state, Phase phase, Rng& rng) {
  const int p = data_.p();
  const Eigen::Index num_k = state.delta.cols();
  const int ell = phase == Phase::initial ? settings_.ell1 : settings_.ell2;

  if (++sweeps_since_refresh_ >= kEtaRefreshInterval) {
    state.eta.noalias() = design_ * state.delta;
    sweeps_since_refresh_ = 0;
  }

  const ActiveSet active = active_set(state.sigma2, settings_.zeta);
  Eigen::VectorXd row_var(p + 1);
  row_var[0] = prior_.sigma0_sq;
  row_var.tail(p) = state.sigma2;

  // Same formula as curvature_estimate() with the column norms cached.
  const double prior_factor = static_cast<double>(num_k) / static_cast<double>(num_k + 1);
  CoefMatrix curvature(p + 1, num_k);
  for (int j = 0; j <= p; ++j) {
    curvature.row(j).setConstant(likelihood_curvature_[j] + prior_factor / row_var[j]);
  }
  const CoefMatrix stepsizes = compute_stepsizes(curvature, settings_.adjust, settings_.stepsize_rule);

  // Contribution of the frozen rows to the predictors.
  Eigen::MatrixXd eta_fixed;
  if (static_cast<int>(active.size()) == p + 1) {
    eta_fixed = Eigen::MatrixXd::Zero(state.eta.rows(), num_k);
  } else {
    eta_fixed = state.eta;
    for (int j : active) eta_fixed -= design_.col(j) * state.delta.row(j);
  }

  ActiveBlockPosterior posterior(design_, labels0_, data_.num_classes, eta_fixed, active, row_var);
  HmcOutcome outcome = hmc_update(state.delta, active, ell, stepsizes, posterior, rng);
  if (outcome.accepted) {
    state.delta = std::move(outcome.new_delta);
    state.eta = posterior.eta();
  }

  SweepDiagnostics diag;
  diag.phase = phase;
  diag.accepted = outcome.accepted;
  diag.divergent = outcome.divergent;
  diag.hamiltonian_delta = outcome.hamiltonian_delta;
  diag.active_size = static_cast<int>(active.size());
  diag.potential = potential(state);
  return diag;
}

bool GibbsSampler::update_variances(ChainState& state, Rng& rng) {
  const int num_k = static_cast<int>(state.delta.cols());
  const double w = std::exp(state.log_w);
  for (Eigen::Index j = 1; j < state.delta.rows(); ++j) {
    const double v = v_of_delta(row_span(state.delta, j), num_k + 1);
    state.sigma2[j - 1] = sample_sigma2(prior_.family, v, num_k, prior_.alpha, w, rng);
  }
  if (!prior_.w_sampled) return false;
  const LogWUpdate update = update_log_w(state.sigma2, prior_, state.log_w, rng);
  state.log_w = update.log_w;
  return update.accepted;
}

SweepDiagnostics GibbsSampler::sweep(ChainState& state, Phase phase, Rng& rng) {
  SweepDiagnostics diag = update_coefficients(state, phase, rng);
  diag.log_w_accepted = update_variances(state, rng);
  return diag;
}

ChainRecord run_chain(const Dataset& data, const PriorSpec& prior, const SamplerSettings& settings,
                      const RunOptions& options) {
  GibbsSampler sampler(data, prior, settings);
  Rng rng(settings.seed);
  ChainState state = sampler.initial_state();

  ChainRecord record;
  record.diagnostics.reserve(static_cast<std::size_t>(settings.n1 + settings.n2));
  const int total = settings.n1 + settings.n2;
  int consecutive_rejections = 0;
  int draw = 0;
  for (int s = 0; s < total; ++s) {
    const Phase phase = s < settings.n1 ? Phase::initial : Phase::sampling;
    const SweepDiagnostics diag = sampler.sweep(state, phase, rng);
    record.diagnostics.push_back(diag);
    if (options.observer != nullptr) options.observer->on_sweep(s, diag);

    consecutive_rejections = diag.accepted ? 0 : consecutive_rejections + 1;
    if (consecutive_rejections > kMaxConsecutiveRejections) {
      throw ChainAbortedError("chain aborted at sweep " + std::to_string(s) + " after " +
                              std::to_string(consecutive_rejections) +
                              " consecutive HMC rejections; lower eps");
    }

    if (phase == Phase::sampling && (s - settings.n1 + 1) % settings.thin == 0) {
      if (options.keep_draws) {
        record.delta_draws.push_back(state.delta);
        record.sigma2_draws.push_back(state.sigma2);
        record.log_w_draws.push_back(state.log_w);
      }
      if (options.observer != nullptr) options.observer->on_draw(draw, state);
      ++draw;
    }
  }
  return record;
}

}  // namespace blrhl
