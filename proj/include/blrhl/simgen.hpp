#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blrhl/inference.hpp"
#include "blrhl/model.hpp"
#include "blrhl/rng.hpp"

namespace blrhl {

enum class GeneratorVariant { two_class, three_class };

std::string to_string(GeneratorVariant variant);
GeneratorVariant parse_generator_variant(const std::string& name);

struct GeneratorSpec {
  GeneratorVariant variant = GeneratorVariant::two_class;
  int n_train = 100;
  int n_test = 1000;
  int p = 200;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const GeneratorSpec&) const = default;
};

struct TruthLabeling {
  std::vector<FeatureGroup> groups;      // groups[j-1] for feature j
  std::optional<CoefMatrix> true_delta;  // rows: intercept, x1, x2
};

struct GeneratedData {
  Dataset train;
  Dataset test;
  TruthLabeling truth;
};

// Bayes-rule coefficients of the two-class generator on standardized
// features (intercept, x1, x2).
inline constexpr double kTwoClassTrueDelta[3] = {0.0, 2.60, -1.22};

/// Two classes with equal probability. x1 = mu_y + z1 + e1 with mu = (0, 2),
/// x2 = 2 z1 + z2 + e2, all other features standard normal noise.
GeneratedData gen_two_class(const GeneratorSpec& spec, Rng& rng);

/// Three classes with equal probability. x1 and x2 share z1 as above, x3..x10
/// share z3, and class 2 shifts x1 while class 3 shifts x3..x10 by 2.
GeneratedData gen_three_class(const GeneratorSpec& spec, Rng& rng);

/// Dispatch on the variant with Rng(spec.seed). Train rows are drawn first.
GeneratedData generate(const GeneratorSpec& spec);

}  // namespace blrhl
