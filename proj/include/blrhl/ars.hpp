#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "blrhl/rng.hpp"

namespace blrhl {

/// A univariate log-concave density known up to a constant, on (lower, upper).
struct LogConcaveTarget {
  std::function<double(double)> log_density;
  std::function<double(double)> derivative;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// Derivative-based adaptive rejection sampler with tangent upper hull and
/// chord squeeze. The hull is kept across draws, so repeated draws from one
/// target get cheaper.
class AdaptiveRejectionSampler {
 public:
  /// `abscissae` must be strictly inside the domain. When the domain is
  /// unbounded on a side, the outermost point on that side must have a
  /// derivative pointing toward the mode, otherwise BracketingError.
  AdaptiveRejectionSampler(LogConcaveTarget target, std::span<const double> abscissae,
                           std::size_t max_points = 64);

  double draw(Rng& rng);

  std::size_t hull_size() const { return x_.size(); }

 private:
  void insert(double x, double h, double dh);
  void rebuild();
  double squeeze(double x) const;

  LogConcaveTarget target_;
  std::size_t max_points_;
  std::vector<double> x_, h_, dh_;
  std::vector<double> z_;    // segment i spans [z_[i], z_[i+1]] under tangent i
  std::vector<double> cdf_;  // cumulative normalized segment masses
};

/// One exact draw from `target`, starting the hull at three abscissae.
double ars_sample(const LogConcaveTarget& target, const std::array<double, 3>& init_abscissae,
                  Rng& rng);

}  // namespace blrhl
