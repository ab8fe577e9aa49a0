#include "blrhl/ars.hpp"

#include <algorithm>
#include <cmath>

#include "blrhl/errors.hpp"

namespace blrhl {

namespace {

constexpr double kEnvelopeTolerance = 1e-8;
constexpr int kMaxTries = 100000;

// log of the integral of exp(h + dh * (x - x0)) over [a, b].
double log_segment_mass(double x0, double h, double dh, double a, double b) {
  const bool left_open = std::isinf(a);
  const bool right_open = std::isinf(b);
  if (left_open && right_open) return std::numeric_limits<double>::infinity();
  if (left_open) {
    return dh > 0.0 ? h + dh * (b - x0) - std::log(dh) : std::numeric_limits<double>::infinity();
  }
  if (right_open) {
    return dh < 0.0 ? h + dh * (a - x0) - std::log(-dh) : std::numeric_limits<double>::infinity();
  }
  const double width = b - a;
  if (width <= 0.0) return -std::numeric_limits<double>::infinity();
  const double t = dh * width;
  if (std::abs(t) < 1e-10) return h + dh * (0.5 * (a + b) - x0) + std::log(width);
  const double u_max = h + dh * ((t > 0.0 ? b : a) - x0);
  return u_max + std::log(-std::expm1(-std::abs(t))) - std::log(std::abs(dh));
}

// Inverse-CDF draw from the density proportional to exp(dh * x) on [a, b].
double sample_segment(double dh, double a, double b, double u) {
  if (std::isinf(a)) return b + std::log(u) / dh;
  if (std::isinf(b)) return a + std::log(u) / dh;
  const double width = b - a;
  const double t = dh * width;
  if (std::abs(t) < 1e-10) return a + u * width;
  if (t > 0.0) return b + std::log(u + (1.0 - u) * std::exp(-t)) / dh;
  return a + std::log1p(u * std::expm1(t)) / dh;
}

}  // namespace

AdaptiveRejectionSampler::AdaptiveRejectionSampler(LogConcaveTarget target,
                                                   std::span<const double> abscissae,
                                                   std::size_t max_points)
    : target_(std::move(target)), max_points_(std::max<std::size_t>(max_points, 3)) {
  if (!(target_.lower < target_.upper)) throw ValidationError("ARS domain is empty");
  if (abscissae.size() < 2) throw ValidationError("ARS needs at least two starting abscissae");
  std::vector<double> xs(abscissae.begin(), abscissae.end());
  std::sort(xs.begin(), xs.end());
  for (double x : xs) {
    if (!(x > target_.lower && x < target_.upper)) {
      throw ValidationError("ARS starting abscissa outside the domain");
    }
    const double h = target_.log_density(x);
    const double dh = target_.derivative(x);
    if (!std::isfinite(h) || !std::isfinite(dh)) {
      throw NumericError("ARS target is not finite at a starting abscissa");
    }
    if (!x_.empty() && x == x_.back()) continue;
    x_.push_back(x);
    h_.push_back(h);
    dh_.push_back(dh);
  }
  if (std::isinf(target_.lower) && !(dh_.front() > 0.0)) {
    throw BracketingError("leftmost ARS abscissa is not left of the mode");
  }
  if (std::isinf(target_.upper) && !(dh_.back() < 0.0)) {
    throw BracketingError("rightmost ARS abscissa is not right of the mode");
  }
  rebuild();
}

void AdaptiveRejectionSampler::insert(double x, double h, double dh) {
  if (!std::isfinite(h) || !std::isfinite(dh)) return;
  const auto it = std::lower_bound(x_.begin(), x_.end(), x);
  if (it != x_.end() && *it == x) return;
  const auto pos = it - x_.begin();
  x_.insert(x_.begin() + pos, x);
  h_.insert(h_.begin() + pos, h);
  dh_.insert(dh_.begin() + pos, dh);
  rebuild();
}

void AdaptiveRejectionSampler::rebuild() {
  const std::size_t k = x_.size();
  z_.assign(k + 1, 0.0);
  z_.front() = target_.lower;
  z_.back() = target_.upper;
  for (std::size_t i = 1; i < k; ++i) {
    const double slope_gap = dh_[i - 1] - dh_[i];
    double z;
    if (std::abs(slope_gap) <= 1e-12 * std::max(std::abs(dh_[i - 1]), std::abs(dh_[i]))) {
      z = 0.5 * (x_[i - 1] + x_[i]);
    } else {
      z = (h_[i] - h_[i - 1] - x_[i] * dh_[i] + x_[i - 1] * dh_[i - 1]) / slope_gap;
    }
    z_[i] = std::clamp(z, x_[i - 1], x_[i]);
  }

  std::vector<double> log_mass(k);
  for (std::size_t i = 0; i < k; ++i) {
    log_mass[i] = log_segment_mass(x_[i], h_[i], dh_[i], z_[i], z_[i + 1]);
  }
  const double top = *std::max_element(log_mass.begin(), log_mass.end());
  if (!std::isfinite(top)) throw NumericError("ARS upper hull has no finite mass");
  cdf_.assign(k, 0.0);
  double running = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    running += std::exp(log_mass[i] - top);
    cdf_[i] = running;
  }
  for (double& c : cdf_) c /= running;
}

double AdaptiveRejectionSampler::squeeze(double x) const {
  if (x < x_.front() || x > x_.back()) return -std::numeric_limits<double>::infinity();
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  if (it == x_.end()) return h_.back();
  const std::size_t j = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double span = x_[j + 1] - x_[j];
  return ((x_[j + 1] - x) * h_[j] + (x - x_[j]) * h_[j + 1]) / span;
}

double AdaptiveRejectionSampler::draw(Rng& rng) {
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    const double pick = rng.uniform();
    const std::size_t seg = std::min<std::size_t>(
        static_cast<std::size_t>(std::lower_bound(cdf_.begin(), cdf_.end(), pick) - cdf_.begin()),
        x_.size() - 1);
    const double x = sample_segment(dh_[seg], z_[seg], z_[seg + 1], rng.uniform());
    const double log_w = std::log(rng.uniform());
    if (!(x > target_.lower && x < target_.upper) || !std::isfinite(x)) continue;

    const double upper_hull = h_[seg] + dh_[seg] * (x - x_[seg]);
    if (log_w <= squeeze(x) - upper_hull) return x;

    const double h = target_.log_density(x);
    if (h > upper_hull + kEnvelopeTolerance * std::max(1.0, std::abs(upper_hull))) {
      throw LogConcavityError("ARS target exceeds its upper hull; density is not log-concave");
    }
    const bool accept = log_w <= h - upper_hull;
    if (x_.size() < max_points_) insert(x, h, target_.derivative(x));
    if (accept) return x;
  }
  throw NumericError("ARS failed to accept a point");
}

double ars_sample(const LogConcaveTarget& target, const std::array<double, 3>& init_abscissae,
                  Rng& rng) {
  AdaptiveRejectionSampler sampler(target, init_abscissae);
  return sampler.draw(rng);
}

}  // namespace blrhl
