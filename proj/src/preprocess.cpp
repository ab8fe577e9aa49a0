#include "blrhl/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "blrhl/errors.hpp"

namespace blrhl {

StandardizeTransform StandardizeTransform::fit(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw ValidationError("cannot standardize an empty dataset");
  const Eigen::Index n = x.rows();
  StandardizeTransform t;
  t.mean = x.colwise().mean().transpose();
  t.scale.resize(x.cols());
  t.degenerate.assign(static_cast<std::size_t>(x.cols()), false);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - t.mean[j]).square().sum();
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    if (sd > 0.0 && std::isfinite(sd)) {
      t.scale[j] = sd;
    } else {
      t.scale[j] = 1.0;
      t.degenerate[static_cast<std::size_t>(j)] = true;
    }
  }
  return t;
}

Eigen::MatrixXd StandardizeTransform::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw ValidationError("feature count does not match the transform");
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

bool StandardizeTransform::any_degenerate() const {
  return std::any_of(degenerate.begin(), degenerate.end(), [](bool b) { return b; });
}

Standardized standardize(const Dataset& train, const std::vector<Dataset>& apply_to) {
  Standardized out;
  out.transform = StandardizeTransform::fit(train.x);
  out.train = train;
  out.train.x = out.transform.apply(train.x);
  out.others.reserve(apply_to.size());
  for (const Dataset& d : apply_to) {
    Dataset t = d;
    t.x = out.transform.apply(d.x);
    out.others.push_back(std::move(t));
  }
  return out;
}

Dataset select_features(const Dataset& data, const std::vector<int>& features) {
  if (features.empty()) throw ValidationError("feature subset is empty");
  Dataset out;
  out.y = data.y;
  out.num_classes = data.num_classes;
  out.x.resize(data.n(), static_cast<Eigen::Index>(features.size()));
  for (std::size_t c = 0; c < features.size(); ++c) {
    const int j = features[c];
    if (j < 1 || j > data.p()) {
      throw ValidationError("feature index " + std::to_string(j) + " outside 1.." + std::to_string(data.p()));
    }
    out.x.col(static_cast<Eigen::Index>(c)) = data.x.col(j - 1);
  }
  return out;
}

}  // namespace blrhl
