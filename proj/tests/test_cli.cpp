#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "blrhl/cli/chain_io.hpp"
#include "blrhl/cli/commands.hpp"
#include "blrhl/cli/config.hpp"
#include "blrhl/cli/csv_io.hpp"
#include "blrhl/errors.hpp"

using namespace blrhl;
using namespace blrhl::cli;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
  const char* root = std::getenv("BLRHL_TEST_TMP");
  const fs::path dir = fs::path(root != nullptr ? root : "cli_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "blrhl");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

RunConfig quick_run(const std::string& dir) {
  RunConfig c;
  c.n_train = 30;
  c.n_test = 40;
  c.p = 4;
  c.settings.n1 = 20;
  c.settings.ell1 = 3;
  c.settings.n2 = 30;
  c.settings.ell2 = 5;
  c.out = dir;
  return c;
}

}  // namespace

TEST_CASE("config text and json round trip") {
  RunConfig c;
  c.prior.family = PriorFamily::neg;
  c.prior.alpha = 0.3;
  c.prior.log_w = -13.7;
  c.prior.w_sampled = true;
  c.settings.n1 = 17;
  c.settings.adjust = 0.1 + 0.2;
  c.settings.seed = 123456789012345ULL;
  c.settings.stepsize_rule = StepsizeRule::inverse;
  c.mode = PredictionMode::plugin_mean;
  c.variant = GeneratorVariant::three_class;
  c.train = "a b/train.csv";
  c.grid = {-20.0, -14.5, 1e-7};
  c.thresholds = {0.1, 0.333};
  c.features = {3, 1, 2};
  c.jobs = 4;

  CHECK(parse_config_text(to_config_text(c)) == c);
  CHECK(config_from_json(to_json(c)) == c);
  CHECK(config_from_json(nlohmann::json::parse(to_json(c).dump())) == c);

  const RunConfig d = parse_config_text("# comment\n\nprior = ghs  # trailing\n alpha=2\n");
  CHECK(d.prior.family == PriorFamily::ghs);
  CHECK(d.prior.alpha == 2.0);

  CHECK_THROWS_AS(parse_config_text("prior = t\nbogus = 1\n"), ValidationError);
  try {
    parse_config_text("prior = t\nbogus = 1\n");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("alpha\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("n1 = 3.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("alpha = abc\n"), ValidationError);

  RunConfig g;
  set_key(g, "grid_range", "-20:-10:3");
  CHECK(g.grid == std::vector<double>{-20.0, -15.0, -10.0});
  CHECK(grid_range(1.0, 1.0, 1) == std::vector<double>{1.0});
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, -1e-300, 1.0 / 3.0, 2.60, 123456789.123, 5e-324}) {
    CHECK(parse_double(format_double(v), "v") == v);
  }
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("dataset csv round trip and errors") {
  const std::string dir = fresh_dir("csv");
  Dataset d;
  d.x.resize(3, 2);
  d.x << 0.1, -2.5, 1.0 / 3.0, 4e-9, 7.0, 8.0;
  d.y = {1, 2, 3};
  d.num_classes = 3;
  write_dataset(dir + "/d.csv", d);
  CHECK(lines_of(dir + "/d.csv")[0] == "y,x1,x2");
  const Dataset r = read_dataset(dir + "/d.csv");
  CHECK(r.x == d.x);
  CHECK(r.y == d.y);
  CHECK(r.num_classes == 3);

  spit(dir + "/bad.csv", "y,x1\n1,0.5\n2,oops\n");
  try {
    read_csv(dir + "/bad.csv");
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  spit(dir + "/gap.csv", "y,x1\n1,0.5\n3,0.2\n");
  CHECK_THROWS_AS(read_dataset(dir + "/gap.csv"), ValidationError);
  CHECK(read_dataset(dir + "/gap.csv", false, 3).num_classes == 3);

  spit(dir + "/header.csv", "label,x1\n1,0.5\n");
  CHECK_THROWS_AS(read_dataset(dir + "/header.csv"), ValidationError);
  CHECK_THROWS_AS(read_dataset(dir + "/missing.csv"), ValidationError);

  TruthLabeling t;
  t.groups = {FeatureGroup::x1_signal, FeatureGroup::corr_group, FeatureGroup::noise};
  write_truth(dir + "/truth.csv", t);
  CHECK(read_truth(dir + "/truth.csv") == t.groups);
}

TEST_CASE("gen writes identical files on rerun") {
  const std::string a = fresh_dir("gen_a");
  const std::string b = fresh_dir("gen_b");
  CHECK(run({"gen", "-o", a, "--seed", "5", "-s", "n_train=50", "-s", "n_test=20"}) == 0);
  CHECK(run({"gen", "-o", b, "--seed", "5", "-s", "n_train=50", "-s", "n_test=20"}) == 0);
  for (const char* f : {"train.csv", "test.csv", "truth.csv", "manifest.json"}) {
    CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));
  }
  const std::vector<std::string> lines = lines_of(fs::path(a) / "train.csv");
  CHECK(lines.size() == 51);
  CHECK(std::count(lines[0].begin(), lines[0].end(), ',') == 200);
  CHECK(lines_of(fs::path(a) / "truth.csv").size() == 201);

  const std::string c = fresh_dir("gen_three");
  CHECK(run({"gen", "-o", c, "--variant", "three_class", "-s", "n_train=5", "-s", "n_test=0", "-s",
             "p=2000"}) == 0);
  const std::string header = lines_of(fs::path(c) / "train.csv")[0];
  CHECK(header.rfind("y,x1,x2,", 0) == 0);
  CHECK(header.substr(header.size() - 6) == ",x2000");
}

TEST_CASE("fit, summarize, rank and predict") {
  const std::string root = fresh_dir("pipeline");
  RunConfig c = quick_run(root + "/data");
  cmd_gen(c);

  c.train = root + "/data/train.csv";
  c.out = root + "/chain";
  cmd_fit(c);
  const ChainManifest m = read_manifest(c.out);
  CHECK(m.p == 4);
  CHECK(m.draws == 30);
  CHECK(m.sweeps == 50);
  CHECK(m.config.out.empty());
  const ChainRecord rec = read_chain(c.out, m);
  CHECK(rec.draw_count() == 30);
  CHECK(rec.diagnostics.size() == 50);
  CHECK(rec.delta_draws[0].rows() == 5);

  RunConfig s;
  s.out = root + "/summary";
  const nlohmann::ordered_json summary = cmd_fit_summarize(c.out, s);
  CHECK(summary["config_roundtrip"].get<bool>());
  CHECK(summary["draws"].get<int>() == 30);
  CHECK(fs::exists(root + "/summary/summary.json"));

  RunConfig r;
  r.chain = c.out;
  r.out = root + "/rank";
  cmd_rank(r);
  const std::vector<std::string> ranking = lines_of(root + "/rank/ranking.csv");
  CHECK(ranking.size() == 5);
  CHECK_FALSE(fs::exists(root + "/rank/selection.csv"));

  r.truth = root + "/data/truth.csv";
  r.thresholds = {0.0, 0.5, 2.0};
  cmd_rank(r);
  const CsvTable sel = read_csv(root + "/rank/selection.csv");
  REQUIRE(sel.rows.size() == 3);
  CHECK(sel.header == std::vector<std::string>{"threshold", "n_retained", "fpr", "sensitivity", "fdr"});
  CHECK(sel.rows[0][1] == 4.0);
  CHECK(sel.rows[0][3] == 1.0);
  CHECK(sel.rows[2][1] == 0.0);
  CHECK(sel.rows[2][4] == 0.0);

  RunConfig p;
  p.chain = c.out;
  p.test = root + "/data/test.csv";
  p.out = root + "/pred";
  cmd_predict(p);
  const CsvTable preds = read_csv(root + "/pred/predictions.csv");
  CHECK(preds.rows.size() == 40);
  for (const auto& row : preds.rows) CHECK(std::abs(row[2] + row[3] - 1.0) < 1e-10);
  const nlohmann::json metrics = read_json(root + "/pred/metrics.json");
  double recomputed = 0.0;
  for (const auto& row : preds.rows) recomputed -= std::log(row[1] == 1.0 ? row[2] : row[3]);
  recomputed /= static_cast<double>(preds.rows.size());
  CHECK(metrics["amlp"].get<double>() == doctest::Approx(recomputed).epsilon(1e-12));
  CHECK(metrics["draws_used"].get<int>() == 24);

  // a feature count mismatch is rejected
  RunConfig wrong = p;
  wrong.test = root + "/data/wrong.csv";
  Dataset d;
  d.x = Eigen::MatrixXd::Zero(2, 3);
  d.y = {1, 2};
  write_dataset(wrong.test, d);
  CHECK_THROWS_AS(cmd_predict(wrong), ValidationError);
}

TEST_CASE("fit with no sampling sweeps still leaves a readable directory") {
  const std::string root = fresh_dir("n2zero");
  RunConfig c = quick_run(root + "/data");
  cmd_gen(c);
  c.train = root + "/data/train.csv";
  c.out = root + "/chain";
  c.settings.n2 = 0;
  cmd_fit(c);
  const ChainManifest m = read_manifest(c.out);
  CHECK(m.draws == 0);
  CHECK(read_chain(c.out, m).draw_count() == 0);
  RunConfig s;
  s.out = root + "/summary";
  const auto summary = cmd_fit_summarize(c.out, s);
  CHECK(summary["top_features"].empty());
}

TEST_CASE("predict with an all-zero three-class chain is uniform") {
  const std::string root = fresh_dir("zero_chain");
  const std::string chain = root + "/chain";
  fs::create_directories(chain);

  ChainRecord rec;
  rec.delta_draws.assign(4, CoefMatrix::Zero(3, 2));
  rec.sigma2_draws.assign(4, VarianceVector::Ones(2));
  rec.log_w_draws.assign(4, -10.0);
  StandardizeTransform tr;
  tr.mean = Eigen::VectorXd::Zero(2);
  tr.scale = Eigen::VectorXd::Ones(2);
  tr.degenerate = {false, false};
  ChainManifest m;
  m.p = 2;
  m.num_classes = 3;
  m.n_train = 10;
  m.draws = 4;
  write_chain_dir(chain, rec, tr, m);

  Dataset test;
  test.x.resize(3, 2);
  test.x << 1.0, 2.0, -1.0, 0.5, 3.0, 3.0;
  test.y = {1, 3, 2};
  test.num_classes = 3;
  write_dataset(root + "/test.csv", test);

  RunConfig p;
  p.chain = chain;
  p.test = root + "/test.csv";
  p.out = root + "/pred";
  cmd_predict(p);
  const nlohmann::json metrics = read_json(root + "/pred/metrics.json");
  CHECK(metrics["amlp"].get<double>() == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  for (const auto& row : read_csv(root + "/pred/predictions.csv").rows) {
    REQUIRE(row.size() == 5);
    CHECK(std::abs(row[2] + row[3] + row[4] - 1.0) < 1e-10);
  }
}

TEST_CASE("sweep writes one chain per grid point") {
  const std::string root = fresh_dir("sweep");
  RunConfig c = quick_run(root + "/data");
  cmd_gen(c);
  c.train = root + "/data/train.csv";
  c.test = root + "/data/test.csv";
  c.out = root + "/sweep";
  c.grid = {-12.0, -9.0, -6.0};
  c.jobs = 2;
  cmd_sweep(c);
  for (const char* d : {"point_000", "point_001", "point_002"}) {
    CHECK(fs::exists(fs::path(c.out) / d / "manifest.json"));
  }
  const std::vector<std::string> paths = lines_of(fs::path(c.out) / "paths.csv");
  CHECK(paths[0] == "log_w,feature,coefficient_mean,sdb,amlp");
  CHECK(paths.size() == 1 + 3 * 4);
}

TEST_CASE("loocv over a feature subset") {
  const std::string root = fresh_dir("loocv");
  RunConfig c = quick_run(root + "/data");
  c.n_train = 12;
  c.p = 6;
  cmd_gen(c);
  c.data = root + "/data/train.csv";
  c.out = root + "/loocv";
  c.features = {1, 2, 5};
  c.jobs = 2;
  cmd_loocv(c);
  const nlohmann::json m = read_json(root + "/loocv/loocv_metrics.json");
  CHECK(m["n_folds"].get<int>() == 12);
  CHECK(m["p"].get<int>() == 3);
  CHECK(m["features"] == nlohmann::json::array({1, 2, 5}));
  CHECK(lines_of(root + "/loocv/loocv_predictions.csv").size() == 13);
}

TEST_CASE("exit codes") {
  const std::string root = fresh_dir("exit");
  CHECK(run({"gen", "-o", root, "-s", "bogus=1"}) == 1);
  CHECK(run({"gen", "-o", root, "-s", "novalue"}) == 1);
  CHECK(run({"fit", "--train", root + "/missing.csv", "-o", root}) == 1);
  CHECK(run({"nonsense"}) == 1);
  CHECK(run({"gen", "-o", root, "-s", "n_train=30", "-s", "n_test=5", "-s", "p=3"}) == 0);

  // a step size far too large makes every proposal fail
  CHECK(run({"fit", "--train", root + "/train.csv", "-o", root + "/chain", "-s", "eps=50", "-s", "n1=1200",
             "-s", "n2=0"}) == 2);

  spit(root + "/bad.cfg", "prior = t\nn1 = -4\n");
  CHECK(run({"fit", "-c", root + "/bad.cfg", "--train", root + "/train.csv", "-o", root + "/c2"}) == 1);
}
