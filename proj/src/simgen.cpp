#include "blrhl/simgen.hpp"

#include "blrhl/errors.hpp"

namespace blrhl {

std::string to_string(GeneratorVariant variant) {
  return variant == GeneratorVariant::three_class ? "three_class" : "two_class";
}

GeneratorVariant parse_generator_variant(const std::string& name) {
  if (name == "two_class") return GeneratorVariant::two_class;
  if (name == "three_class") return GeneratorVariant::three_class;
  throw ValidationError("unknown generator variant '" + name + "'");
}

void GeneratorSpec::validate() const {
  if (n_train < 1 || n_test < 0) throw ValidationError("n_train must be positive and n_test nonnegative");
  const int min_p = variant == GeneratorVariant::two_class ? 2 : 10;
  if (p < min_p) {
    throw ValidationError("generator " + to_string(variant) + " needs p >= " + std::to_string(min_p));
  }
}

namespace {

Dataset blank(int n, int p, int num_classes) {
  Dataset d;
  d.x.resize(n, p);
  d.y.resize(static_cast<std::size_t>(n));
  d.num_classes = num_classes;
  return d;
}

// Fills one row of the two-class design.
void two_class_row(Dataset& d, int i, Rng& rng) {
  const int y = rng.below(2) + 1;
  d.y[i] = y;
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  d.x(i, 0) = (y == 2 ? 2.0 : 0.0) + z1 + rng.normal();
  d.x(i, 1) = 2.0 * z1 + z2 + rng.normal();
  for (int j = 2; j < d.p(); ++j) d.x(i, j) = rng.normal();
}

void three_class_row(Dataset& d, int i, Rng& rng) {
  const int y = rng.below(3) + 1;
  d.y[i] = y;
  auto mu = [y](int j) {  // j is 1-based
    if (y == 2 && j == 1) return 2.0;
    if (y == 3 && j >= 3 && j <= 10) return 2.0;
    return 0.0;
  };
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double z3 = rng.normal();
  d.x(i, 0) = mu(1) + z1 + 0.5 * rng.normal();
  d.x(i, 1) = mu(2) + 2.0 * z1 + z2 + 0.5 * rng.normal();
  for (int j = 3; j <= 10; ++j) d.x(i, j - 1) = mu(j) + z3 + 0.5 * rng.normal();
  for (int j = 10; j < d.p(); ++j) d.x(i, j) = rng.normal();
}

template <class RowFn>
GeneratedData fill(const GeneratorSpec& spec, int num_classes, Rng& rng, RowFn row) {
  GeneratedData out;
  out.train = blank(spec.n_train, spec.p, num_classes);
  out.test = blank(spec.n_test, spec.p, num_classes);
  for (int i = 0; i < spec.n_train; ++i) row(out.train, i, rng);
  for (int i = 0; i < spec.n_test; ++i) row(out.test, i, rng);
  return out;
}

}  // namespace

GeneratedData gen_two_class(const GeneratorSpec& spec, Rng& rng) {
  GeneratorSpec s = spec;
  s.variant = GeneratorVariant::two_class;
  s.validate();
  GeneratedData out = fill(s, 2, rng, two_class_row);
  out.truth.groups.assign(static_cast<std::size_t>(s.p), FeatureGroup::noise);
  out.truth.groups[0] = FeatureGroup::x1_signal;
  out.truth.groups[1] = FeatureGroup::x2_correlated_signal;
  CoefMatrix delta(3, 1);
  for (int r = 0; r < 3; ++r) delta(r, 0) = kTwoClassTrueDelta[r];
  out.truth.true_delta = delta;
  return out;
}

GeneratedData gen_three_class(const GeneratorSpec& spec, Rng& rng) {
  GeneratorSpec s = spec;
  s.variant = GeneratorVariant::three_class;
  s.validate();
  GeneratedData out = fill(s, 3, rng, three_class_row);
  out.truth.groups.assign(static_cast<std::size_t>(s.p), FeatureGroup::noise);
  out.truth.groups[0] = FeatureGroup::x1_signal;
  out.truth.groups[1] = FeatureGroup::x2_correlated_signal;
  for (int j = 2; j < 10; ++j) out.truth.groups[j] = FeatureGroup::corr_group;
  return out;
}

GeneratedData generate(const GeneratorSpec& spec) {
  Rng rng(spec.seed);
  return spec.variant == GeneratorVariant::two_class ? gen_two_class(spec, rng)
                                                         : gen_three_class(spec, rng);
}

}  // namespace blrhl
