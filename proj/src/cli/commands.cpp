#include "blrhl/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "blrhl/cli/chain_io.hpp"
#include "blrhl/cli/csv_io.hpp"
#include "blrhl/errors.hpp"

namespace blrhl::cli {

namespace fs = std::filesystem;

namespace {

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string require(const std::string& value, const std::string& key) {
  if (value.empty()) throw ValidationError("missing required setting '" + key + "'");
  return value;
}

// JSON has no infinity; an infinite AMLP is written as null.
nlohmann::ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

Dataset maybe_subset(const Dataset& data, const std::vector<int>& features) {
  return features.empty() ? data : select_features(data, features);
}

// The manifest lives inside the output directory, so it does not echo it.
RunConfig echo(RunConfig config) {
  config.out.clear();
  return config;
}

void write_predictions(const std::string& path, const Eigen::MatrixXd& probs, const std::vector<int>& y) {
  std::ofstream out;
  open_for_write(out, path);
  out << "row,y";
  for (Eigen::Index c = 1; c <= probs.cols(); ++c) out << ",p" << c;
  out << '\n';
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    out << i + 1 << ',' << y[static_cast<std::size_t>(i)];
    for (Eigen::Index c = 0; c < probs.cols(); ++c) out << ',' << format_double(probs(i, c));
    out << '\n';
  }
  if (!out) throw ValidationError("failed writing " + path);
}

}  // namespace

std::string output_dir(const RunConfig& config) { return config.out.empty() ? default_out_dir() : config.out; }

void cmd_gen(const RunConfig& config) {
  const GeneratorSpec spec = config.generator_spec();
  spec.validate();
  const GeneratedData data = generate(spec);
  const std::string dir = output_dir(config);
  fs::create_directories(dir);
  write_dataset(in_dir(dir, "train.csv"), data.train);
  write_dataset(in_dir(dir, "test.csv"), data.test);
  write_truth(in_dir(dir, "truth.csv"), data.truth);

  nlohmann::ordered_json m;
  m["command"] = "gen";
  m["variant"] = to_string(spec.variant);
  m["n_train"] = spec.n_train;
  m["n_test"] = spec.n_test;
  m["p"] = spec.p;
  m["seed"] = spec.seed;
  if (data.truth.true_delta) {
    const CoefMatrix& d = *data.truth.true_delta;
    m["true_delta"] = std::vector<double>(d.data(), d.data() + d.size());
  } else {
    m["true_delta"] = nullptr;
  }
  write_json(in_dir(dir, "manifest.json"), m);
}

void cmd_fit(const RunConfig& config) {
  config.validate();
  const Dataset raw = read_dataset(require(config.train, "train"));
  const Dataset train = maybe_subset(raw, config.features);
  train.validate();
  const Standardized std_data = standardize(train);
  for (std::size_t j = 0; j < std_data.transform.degenerate.size(); ++j) {
    if (std_data.transform.degenerate[j]) std::cerr << "warning: feature " << j + 1 << " is constant in training data\n";
  }

  const std::string dir = output_dir(config);
  ChainWriter writer(dir, train.p(), train.num_classes);
  RunOptions options;
  options.keep_draws = false;
  options.observer = &writer;
  const ChainRecord record = run_chain(std_data.train, config.prior, config.settings, options);
  writer.close();

  ChainManifest manifest;
  manifest.config = echo(config);
  manifest.n_train = train.n();
  manifest.p = train.p();
  manifest.num_classes = train.num_classes;
  manifest.features = config.features;
  manifest.draws = static_cast<std::size_t>(config.settings.n2 / config.settings.thin);
  manifest.sweeps = record.diagnostics.size();
  write_transform(dir, std_data.transform);
  write_manifest(dir, manifest);
}

nlohmann::ordered_json cmd_fit_summarize(const std::string& chain_dir, const RunConfig& config) {
  const ChainManifest manifest = read_manifest(chain_dir);
  const ChainRecord record = read_chain(chain_dir, manifest);
  const RunConfig roundtrip = config_from_json(to_json(manifest.config));

  nlohmann::ordered_json s;
  s["chain"] = chain_dir;
  s["config"] = to_json(manifest.config);
  s["config_roundtrip"] = roundtrip == manifest.config;
  s["p"] = manifest.p;
  s["num_classes"] = manifest.num_classes;
  s["draws"] = record.draw_count();
  s["sweeps"] = record.diagnostics.size();

  int accepted = 0, divergent = 0, sampling = 0;
  double active = 0.0;
  for (const SweepDiagnostics& d : record.diagnostics) {
    if (d.phase != Phase::sampling) continue;
    ++sampling;
    accepted += d.accepted;
    divergent += d.divergent;
    active += d.active_size;
  }
  s["sampling_acceptance_rate"] = sampling > 0 ? static_cast<double>(accepted) / sampling : 0.0;
  s["sampling_divergent"] = divergent;
  s["mean_active_size"] = sampling > 0 ? active / sampling : 0.0;

  const double burnin = manifest.config.burnin_frac;
  if (record.draw_count() > 0 && burnin_count(record.draw_count(), burnin) < record.draw_count()) {
    const FeatureRanking ranking = feature_ranking(coefficient_means(record, burnin), manifest.num_classes);
    auto top = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < std::min<std::size_t>(10, ranking.order.size()); ++r) {
      const int f = ranking.order[r];
      top.push_back({{"feature", f}, {"sdb", ranking.sdb[f - 1]}, {"relative_sdb", ranking.relative_sdb[f - 1]}});
    }
    s["top_features"] = top;
  } else {
    s["top_features"] = nlohmann::ordered_json::array();
  }

  const std::string dir = output_dir(config);
  fs::create_directories(dir);
  write_json(in_dir(dir, "summary.json"), s);
  return s;
}

void cmd_rank(const RunConfig& config) {
  const std::string chain_dir = require(config.chain, "chain");
  const ChainManifest manifest = read_manifest(chain_dir);
  const ChainRecord record = read_chain(chain_dir, manifest);
  if (record.draw_count() == 0) throw ValidationError(chain_dir + ": chain has no draws");
  const FeatureRanking ranking = feature_ranking(coefficient_means(record, config.burnin_frac), manifest.num_classes);

  const std::string dir = output_dir(config);
  fs::create_directories(dir);
  std::ofstream out;
  open_for_write(out, in_dir(dir, "ranking.csv"));
  out << "feature_index,sdb,relative_sdb,rank\n";
  for (std::size_t r = 0; r < ranking.order.size(); ++r) {
    const int f = ranking.order[r];
    // Report indices in the original input columns when a subset was fitted.
    const int original = manifest.features.empty() ? f : manifest.features[static_cast<std::size_t>(f - 1)];
    out << original << ',' << format_double(ranking.sdb[f - 1]) << ',' << format_double(ranking.relative_sdb[f - 1])
        << ',' << r + 1 << '\n';
  }
  if (!out) throw ValidationError("failed writing ranking.csv");

  if (config.truth.empty()) return;
  std::vector<FeatureGroup> truth = read_truth(config.truth);
  if (!manifest.features.empty()) {
    std::vector<FeatureGroup> subset;
    for (int f : manifest.features) {
      if (f < 1 || f > static_cast<int>(truth.size())) throw ValidationError("truth file does not cover feature " + std::to_string(f));
      subset.push_back(truth[static_cast<std::size_t>(f - 1)]);
    }
    truth = std::move(subset);
  }
  const std::vector<SelectionMetrics> metrics = selection_metrics(ranking, truth, config.thresholds);
  std::ofstream sel;
  open_for_write(sel, in_dir(dir, "selection.csv"));
  sel << "threshold,n_retained,fpr,sensitivity,fdr\n";
  for (const SelectionMetrics& m : metrics) {
    sel << format_double(m.threshold) << ',' << m.n_retained << ',' << format_double(m.fpr) << ','
        << format_double(m.sensitivity) << ',' << format_double(m.fdr) << '\n';
  }
  if (!sel) throw ValidationError("failed writing selection.csv");
}

void cmd_predict(const RunConfig& config) {
  const std::string chain_dir = require(config.chain, "chain");
  const ChainManifest manifest = read_manifest(chain_dir);
  const StandardizeTransform transform = read_transform(chain_dir);
  const ChainRecord record = read_chain(chain_dir, manifest);
  if (record.draw_count() == 0) throw ValidationError(chain_dir + ": chain has no draws");

  const Dataset raw = read_dataset(require(config.test, "test"), false, manifest.num_classes);
  const Dataset test = maybe_subset(raw, manifest.features);
  if (test.p() != manifest.p) {
    throw ValidationError("test set has " + std::to_string(test.p()) + " features, chain expects " +
                          std::to_string(manifest.p));
  }
  const Eigen::MatrixXd x = transform.apply(test.x);
  const PredictionResult result =
      summarize_predictions(predict(record, config.burnin_frac, x, config.mode), test.y);

  const std::string dir = output_dir(config);
  fs::create_directories(dir);
  write_predictions(in_dir(dir, "predictions.csv"), result.probs, test.y);
  nlohmann::ordered_json m;
  m["mode"] = to_string(config.mode);
  m["burnin_frac"] = config.burnin_frac;
  m["draws_used"] = record.draw_count() - burnin_count(record.draw_count(), config.burnin_frac);
  m["n_test"] = test.n();
  m["amlp"] = finite_or_null(result.amlp);
  m["error_rate"] = result.error_rate;
  write_json(in_dir(dir, "metrics.json"), m);
}

void cmd_sweep(const RunConfig& config) {
  config.validate();
  if (config.grid.empty()) throw ValidationError("sweep needs a grid (grid or grid_range)");
  const Dataset train = maybe_subset(read_dataset(require(config.train, "train")), config.features);
  std::optional<Dataset> test;
  if (!config.test.empty()) {
    test = maybe_subset(read_dataset(config.test, false, train.num_classes), config.features);
  }

  const std::string dir = output_dir(config);
  fs::create_directories(dir);
  auto point_dir = [&](int g) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%03d", g);
    return in_dir(dir, name);
  };

  const auto points = scale_sweep(
      train, test ? &*test : nullptr, config.fit_config(), config.grid, config.jobs,
      [&](int g, const SweepPoint& point, const FitResult& fit) {
        ChainManifest manifest;
        manifest.command = "sweep";
        manifest.config = echo(config);
        manifest.config.prior.log_w = point.log_w;
        manifest.config.settings.seed = point.seed;
        manifest.config.grid.clear();
        manifest.n_train = train.n();
        manifest.p = train.p();
        manifest.num_classes = train.num_classes;
        manifest.features = config.features;
        manifest.draws = fit.record.draw_count();
        manifest.sweeps = fit.record.diagnostics.size();
        write_chain_dir(point_dir(g), fit.record, fit.transform, manifest);
      });

  const int num_k = train.num_classes - 1;
  std::ofstream out;
  open_for_write(out, in_dir(dir, "paths.csv"));
  out << "log_w,feature";
  if (num_k == 1) {
    out << ",coefficient_mean";
  } else {
    for (int k = 1; k <= num_k; ++k) out << ",coefficient_mean_" << k;
  }
  out << ",sdb,amlp\n";
  for (const SweepPoint& point : points) {
    const std::string amlp = point.test ? format_double(point.test->amlp) : "nan";
    for (int j = 1; j <= train.p(); ++j) {
      out << format_double(point.log_w) << ',' << j << ',';
      write_row(out, point.delta_hat.row(j).data(), static_cast<std::size_t>(num_k));
      out << ',' << format_double(point.ranking.sdb[j - 1]) << ',' << amlp << '\n';
    }
  }
  if (!out) throw ValidationError("failed writing paths.csv");
}

void cmd_loocv(const RunConfig& config) {
  config.validate();
  const std::string path = !config.data.empty() ? config.data : require(config.train, "data");
  const Dataset data = maybe_subset(read_dataset(path), config.features);
  const LoocvResult result = loocv_driver(data, config.fit_config(), config.jobs);

  const std::string dir = output_dir(config);
  fs::create_directories(dir);
  std::ofstream out;
  open_for_write(out, in_dir(dir, "loocv_predictions.csv"));
  out << "fold,y,failed";
  for (int c = 1; c <= data.num_classes; ++c) out << ",p" << c;
  out << '\n';
  for (const LoocvFold& fold : result.folds) {
    out << fold.index + 1 << ',' << data.y[static_cast<std::size_t>(fold.index)] << ',' << (fold.failed ? 1 : 0);
    for (int c = 0; c < data.num_classes; ++c) out << ',' << (fold.failed ? "nan" : format_double(fold.probs[c]));
    out << '\n';
    if (fold.failed) std::cerr << "warning: fold " << fold.index + 1 << " failed: " << fold.message << '\n';
  }
  if (!out) throw ValidationError("failed writing loocv_predictions.csv");

  nlohmann::ordered_json m;
  m["n_folds"] = result.folds.size();
  m["n_failed"] = result.n_failed;
  m["p"] = data.p();
  m["features"] = config.features;
  m["mode"] = to_string(config.mode);
  m["amlp"] = result.summary ? finite_or_null(result.summary->amlp) : nlohmann::ordered_json(nullptr);
  m["error_rate"] = result.summary ? nlohmann::ordered_json(result.summary->error_rate) : nlohmann::ordered_json(nullptr);
  write_json(in_dir(dir, "loocv_metrics.json"), m);

  nlohmann::ordered_json manifest;
  manifest["command"] = "loocv";
  manifest["data"] = path;
  manifest["n"] = data.n();
  manifest["p"] = data.p();
  manifest["num_classes"] = data.num_classes;
  manifest["config"] = to_json(echo(config));
  write_json(in_dir(dir, "manifest.json"), manifest);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Bayesian multinomial logistic regression with hyper-LASSO priors"};
  app.require_subcommand(1);

  struct Common {
    std::string config_file;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;
  };
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config_file, "flat key = value config file");
    sub->add_option("-s,--set", common.sets, "override a setting, KEY=VALUE (repeatable)");
    auto flag = [&, sub](const std::string& names, const std::string& key, const std::string& help) {
      sub->add_option_function<std::string>(names, [&common, key](const std::string& v) {
        common.flags.emplace_back(key, v);
      }, help);
    };
    flag("-o,--out", "out", "output directory (default $BLRHL_OUT_DIR or ./out)");
    flag("--seed", "seed", "random seed");
    return flag;
  };

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_common(gen)("--variant", "variant", "two_class or three_class");

  std::string summarize_dir;
  auto* fit = app.add_subcommand("fit", "run one chain on a training set");
  {
    auto flag = add_common(fit);
    flag("--train", "train", "training CSV");
    flag("--features", "features", "comma-separated 1-based feature subset");
    fit->add_option("--resume-summarize", summarize_dir, "summarize an existing chain directory");
  }

  auto* rank = app.add_subcommand("rank", "rank features by SDB of the posterior mean");
  {
    auto flag = add_common(rank);
    flag("--chain", "chain", "chain directory");
    flag("--truth", "truth", "feature,group file for selection metrics");
  }

  auto* pred = app.add_subcommand("predict", "predictive probabilities for a test set");
  {
    auto flag = add_common(pred);
    flag("--chain", "chain", "chain directory");
    flag("--test", "test", "test CSV");
    flag("--mode", "mode", "bayes_average or plugin_mean");
  }

  auto* sweep = app.add_subcommand("sweep", "fit over a grid of log(w)");
  {
    auto flag = add_common(sweep);
    flag("--train", "train", "training CSV");
    flag("--test", "test", "test CSV");
    flag("--grid-range", "grid_range", "from:to:points");
    flag("-j,--jobs", "jobs", "worker threads");
  }

  auto* loocv = app.add_subcommand("loocv", "leave-one-out cross-validation");
  {
    auto flag = add_common(loocv);
    flag("--data", "data", "dataset CSV");
    flag("--features", "features", "comma-separated 1-based feature subset");
    flag("-j,--jobs", "jobs", "worker threads");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig config;
    if (!common.config_file.empty()) config = load_config_file(common.config_file);
    for (const std::string& s : common.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects KEY=VALUE, got '" + s + "'");
      set_key(config, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : common.flags) set_key(config, k, v);

    if (*gen) cmd_gen(config);
    else if (*fit && !summarize_dir.empty()) cmd_fit_summarize(summarize_dir, config);
    else if (*fit) cmd_fit(config);
    else if (*rank) cmd_rank(config);
    else if (*pred) cmd_predict(config);
    else if (*sweep) cmd_sweep(config);
    else if (*loocv) cmd_loocv(config);
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace blrhl::cli
