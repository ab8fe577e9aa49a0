#pragma once

#include <cstdint>
#include <vector>

#include "blrhl/hmc.hpp"
#include "blrhl/model.hpp"
#include "blrhl/rng.hpp"

namespace blrhl {

struct SamplerSettings {
  int n1 = 5000;    // initial-phase sweeps
  int ell1 = 5;     // initial-phase trajectory length
  int n2 = 10000;   // sampling-phase sweeps
  int ell2 = 50;    // sampling-phase trajectory length
  double adjust = 0.3;
  double zeta = 0.05;  // restriction threshold on sigma_j
  int thin = 1;
  std::uint64_t seed = 1;
  StepsizeRule stepsize_rule = StepsizeRule::inverse_sqrt;

  void validate() const;
  bool operator==(const SamplerSettings&) const = default;
};

enum class Phase { initial, sampling };

struct ChainState {
  CoefMatrix delta;
  VarianceVector sigma2;
  double log_w = 0.0;
  Eigen::MatrixXd eta;  // n x K linear predictors of delta
};

struct SweepDiagnostics {
  Phase phase = Phase::initial;
  bool accepted = false;
  bool divergent = false;
  double hamiltonian_delta = 0.0;
  int active_size = 0;
  double potential = 0.0;  // full U = -log L - log p(delta | sigma^2) after Step 1
  bool log_w_accepted = false;
};

struct ChainRecord {
  std::vector<CoefMatrix> delta_draws;
  std::vector<VarianceVector> sigma2_draws;
  std::vector<double> log_w_draws;
  std::vector<SweepDiagnostics> diagnostics;  // one per sweep, both phases

  std::size_t draw_count() const { return delta_draws.size(); }
};

/// Receives sweeps and recorded draws as the chain runs.
class ChainObserver {
 public:
  virtual ~ChainObserver() = default;
  virtual void on_sweep(int /*sweep*/, const SweepDiagnostics& /*diag*/) {}
  virtual void on_draw(int /*draw*/, const ChainState& /*state*/) {}
};

/// Gaussian Bayes discriminant rule expressed as deltas. Class means are the
/// per-class sample means; the covariance is half the pooled within-class
/// covariance plus half the identity (diagonal only when p >= n).
CoefMatrix init_delta(const Dataset& data, const PriorSpec& prior);

/// sigma_j^2 = max(V(delta_j) / K, w).
VarianceVector init_sigma2(const CoefMatrix& delta, const PriorSpec& prior);

/// {0} plus every feature with sigma_j > zeta.
ActiveSet active_set(const VarianceVector& sigma2, double zeta);

/// Restricted Gibbs sampler for one dataset. Owns the design matrix and the
/// frozen-predictor bookkeeping; not shareable across threads.
class GibbsSampler {
 public:
  GibbsSampler(const Dataset& data, const PriorSpec& prior, const SamplerSettings& settings);

  ChainState initial_state() const;

  /// Step 1: HMC on the active rows with stepsizes from the current sigma^2.
  SweepDiagnostics update_coefficients(ChainState& state, Phase phase, Rng& rng);
  /// Step 2: redraw every sigma_j^2, j >= 1, then log(w) when sampled.
  bool update_variances(ChainState& state, Rng& rng);
  /// Both steps.
  SweepDiagnostics sweep(ChainState& state, Phase phase, Rng& rng);

  /// Full U at the state's delta and sigma^2.
  double potential(const ChainState& state) const;

  const Dataset& data() const { return data_; }

 private:
  const Dataset& data_;
  PriorSpec prior_;
  SamplerSettings settings_;
  Eigen::MatrixXd design_;
  std::vector<int> labels0_;
  Eigen::VectorXd likelihood_curvature_;  // sum_i x_ij^2 / 4, row 0 = n / 4
  int sweeps_since_refresh_ = 0;
};

struct RunOptions {
  bool keep_draws = true;
  ChainObserver* observer = nullptr;
};

// More consecutive rejections than this abort the run.
inline constexpr int kMaxConsecutiveRejections = 1000;

/// init -> n1 initial sweeps -> n2 sampling sweeps, recording every thin-th.
ChainRecord run_chain(const Dataset& data, const PriorSpec& prior, const SamplerSettings& settings,
                      const RunOptions& options = {});

}  // namespace blrhl
