#include "blrhl/workflow.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "blrhl/errors.hpp"

namespace blrhl {

void FitConfig::validate() const {
  prior.validate();
  settings.validate();
  if (!(burnin_frac >= 0.0 && burnin_frac < 1.0)) throw ValidationError("burnin_frac must be in [0, 1)");
}

FitResult fit_and_predict(const Dataset& train, const Dataset* test, const FitConfig& config,
                          ChainObserver* observer) {
  config.validate();
  train.validate();
  Standardized std_data = test != nullptr ? standardize(train, {*test}) : standardize(train);

  FitResult result;
  result.transform = std::move(std_data.transform);
  RunOptions options;
  options.observer = observer;
  result.record = run_chain(std_data.train, config.prior, config.settings, options);
  if (result.record.draw_count() == 0) return result;

  result.delta_hat = coefficient_means(result.record, config.burnin_frac);
  result.ranking = feature_ranking(result.delta_hat, train.num_classes);
  if (test != nullptr && test->n() > 0) {
    const Dataset& t = std_data.others.front();
    result.test = summarize_predictions(predict(result.record, config.burnin_frac, t.x, config.mode), t.y);
  }
  return result;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::clamp(jobs, 1, count);
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

LoocvResult loocv_driver(const Dataset& data, const FitConfig& config, int jobs) {
  data.validate();
  config.validate();
  const int n = data.n();
  if (n < 2) throw ValidationError("LOOCV needs at least 2 cases");

  LoocvResult result;
  result.folds.resize(static_cast<std::size_t>(n));
  parallel_for(n, jobs, [&](int i) {
    LoocvFold& fold = result.folds[static_cast<std::size_t>(i)];
    fold.index = i;

    Dataset train;
    train.num_classes = data.num_classes;
    train.x.resize(n - 1, data.p());
    train.y.reserve(static_cast<std::size_t>(n - 1));
    std::vector<int> counts(static_cast<std::size_t>(data.num_classes), 0);
    for (int r = 0, out = 0; r < n; ++r) {
      if (r == i) continue;
      train.x.row(out++) = data.x.row(r);
      train.y.push_back(data.y[r]);
      ++counts[static_cast<std::size_t>(data.y[r] - 1)];
    }
    for (int c = 0; c < data.num_classes; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        fold.failed = true;
        fold.message = "training set lacks class " + std::to_string(c + 1);
        return;
      }
    }

    Dataset held;
    held.num_classes = data.num_classes;
    held.x = data.x.row(i);
    held.y = {data.y[i]};

    FitConfig fold_config = config;
    fold_config.settings.seed = config.settings.seed + static_cast<std::uint64_t>(i);
    try {
      FitResult fit = fit_and_predict(train, &held, fold_config);
      if (!fit.test) {
        fold.failed = true;
        fold.message = "chain produced no draws";
        return;
      }
      fold.probs = fit.test->probs.row(0);
    } catch (const NumericError& e) {
      fold.failed = true;
      fold.message = e.what();
    }
  });

  std::vector<int> labels;
  Eigen::MatrixXd probs(n, data.num_classes);
  int ok = 0;
  for (const LoocvFold& fold : result.folds) {
    if (fold.failed) {
      ++result.n_failed;
      continue;
    }
    probs.row(ok++) = fold.probs;
    labels.push_back(data.y[static_cast<std::size_t>(fold.index)]);
  }
  if (ok > 0) result.summary = summarize_predictions(probs.topRows(ok), labels);
  return result;
}

std::vector<SweepPoint> scale_sweep(const Dataset& train, const Dataset* test, const FitConfig& base,
                                    const std::vector<double>& log_w_grid, int jobs,
                                    const SweepCallback& on_point) {
  if (log_w_grid.empty()) throw ValidationError("log(w) grid is empty");
  base.validate();
  std::vector<SweepPoint> points(log_w_grid.size());
  parallel_for(static_cast<int>(log_w_grid.size()), jobs, [&](int g) {
    FitConfig config = base;
    config.prior.log_w = log_w_grid[static_cast<std::size_t>(g)];
    config.settings.seed = base.settings.seed + static_cast<std::uint64_t>(g);
    FitResult fit = fit_and_predict(train, test, config);
    if (fit.record.draw_count() == 0) throw ValidationError("sweep needs n2 > 0");

    SweepPoint& point = points[static_cast<std::size_t>(g)];
    point.log_w = config.prior.log_w;
    point.seed = config.settings.seed;
    point.delta_hat = fit.delta_hat;
    point.ranking = fit.ranking;
    point.test = fit.test;
    if (on_point) on_point(g, point, fit);
  });
  return points;
}

}  // namespace blrhl
