#pragma once

#include <cstdint>
#include <random>

namespace blrhl {

/// Seeded random stream. Every chain, fold and sweep point owns one.
///
/// Normal and gamma variates are generated here rather than through the
/// standard distribution classes so draws are identical across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();
  /// Gamma with the given shape and *rate*. Valid for any shape > 0.
  double gamma(double shape, double rate);
  /// Uniform integer on [0, n).
  int below(int n);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace blrhl
