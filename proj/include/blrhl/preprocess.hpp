#pragma once

#include <vector>

#include "blrhl/model.hpp"

namespace blrhl {

/// Per-column centering and scaling learned from a training set.
struct StandardizeTransform {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;          // sample sd (n-1); 1 for constant columns
  std::vector<bool> degenerate;   // true where the training column was constant

  /// Fit on the columns of x. Needs at least one row.
  static StandardizeTransform fit(const Eigen::MatrixXd& x);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  bool any_degenerate() const;
};

struct Standardized {
  Dataset train;
  std::vector<Dataset> others;
  StandardizeTransform transform;
};

/// Fit the transform on train and apply it to train and every other set.
Standardized standardize(const Dataset& train, const std::vector<Dataset>& apply_to = {});

/// Keep only the listed 1-based feature columns, in the given order.
Dataset select_features(const Dataset& data, const std::vector<int>& features);

}  // namespace blrhl
