#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "blrhl/errors.hpp"
#include "blrhl/inference.hpp"
#include "oracles.hpp"

using namespace blrhl;

namespace {

ChainRecord random_chain(int draws, int p, int k, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, scale);
  ChainRecord record;
  for (int d = 0; d < draws; ++d) {
    CoefMatrix delta(p + 1, k);
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta.data()[i] = normal(gen);
    record.delta_draws.push_back(delta);
    record.sigma2_draws.push_back(VarianceVector::Ones(p));
    record.log_w_draws.push_back(0.0);
  }
  return record;
}

Eigen::MatrixXd random_x(int n, int p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
  return x;
}

FeatureRanking ranking_from_relative(std::vector<double> rel) {
  FeatureRanking r;
  r.sdb = Eigen::Map<Eigen::VectorXd>(rel.data(), static_cast<Eigen::Index>(rel.size()));
  r.relative_sdb = r.sdb / r.sdb.maxCoeff();
  r.order.resize(rel.size());
  std::iota(r.order.begin(), r.order.end(), 1);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](int a, int b) { return rel[a - 1] > rel[b - 1]; });
  return r;
}

}  // namespace

TEST_CASE("burn-in count floors the fraction") {
  CHECK(burnin_count(10, 0.2) == 2);
  CHECK(burnin_count(9, 0.2) == 1);
  CHECK(burnin_count(5, 0.0) == 0);
  CHECK_THROWS_AS(burnin_count(5, 1.0), ValidationError);
  CHECK_THROWS_AS(burnin_count(5, -0.1), ValidationError);
}

TEST_CASE("coefficient means") {
  SUBCASE("single draw is returned as is") {
    const ChainRecord r = random_chain(1, 4, 2, 3);
    CHECK((coefficient_means(r, 0.0) - r.delta_draws[0]).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("d and -d average to zero") {
    ChainRecord r = random_chain(1, 4, 2, 4);
    r.delta_draws.push_back(-r.delta_draws[0]);
    CHECK(coefficient_means(r, 0.0).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("matches a two-pass mean after burn-in") {
    const ChainRecord r = random_chain(250, 5, 3, 5, 3.0);
    const CoefMatrix got = coefficient_means(r, 0.2);
    for (Eigen::Index j = 0; j < got.rows(); ++j) {
      for (Eigen::Index k = 0; k < got.cols(); ++k) {
        std::vector<double> xs;
        for (std::size_t d = 50; d < 250; ++d) xs.push_back(r.delta_draws[d](j, k));
        CHECK(got(j, k) == doctest::Approx(oracle::mean_var(xs).first).epsilon(1e-12));
      }
    }
  }
  SUBCASE("empty chain after burn-in") {
    CHECK_THROWS_AS(coefficient_means(ChainRecord{}, 0.0), ValidationError);
  }
}

TEST_CASE("feature ranking") {
  SUBCASE("all zero") {
    const FeatureRanking r = feature_ranking(CoefMatrix::Zero(4, 2), 3);
    CHECK(r.sdb.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.relative_sdb.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.order == std::vector<int>{1, 2, 3});
  }
  SUBCASE("two classes: sdb is half the absolute coefficient") {
    CoefMatrix d(4, 1);
    d << 7.0, 4.0, -1.0, 2.0;
    const FeatureRanking r = feature_ranking(d, 2);
    CHECK(r.sdb[0] == doctest::Approx(2.0));
    CHECK(r.sdb[1] == doctest::Approx(0.5));
    CHECK(r.relative_sdb[0] == 1.0);
    CHECK(r.relative_sdb[2] == doctest::Approx(0.5));
    CHECK(r.order == std::vector<int>{1, 3, 2});
  }
  SUBCASE("ties keep feature order") {
    CoefMatrix d(4, 1);
    d << 0.0, 1.0, -3.0, 3.0;
    CHECK(feature_ranking(d, 2).order == std::vector<int>{2, 3, 1});
  }
  SUBCASE("permutation equivariance and scale invariance") {
    const CoefMatrix d = random_chain(1, 8, 2, 11).delta_draws[0];
    const FeatureRanking base = feature_ranking(d, 3);
    const std::vector<int> perm{5, 2, 7, 0, 3, 6, 1, 4};  // new feature f+1 = old perm[f]+1
    CoefMatrix permuted = d;
    for (int f = 0; f < 8; ++f) permuted.row(f + 1) = d.row(perm[f] + 1);
    const FeatureRanking pr = feature_ranking(permuted, 3);
    for (int f = 0; f < 8; ++f) CHECK(pr.sdb[f] == base.sdb[perm[f]]);
    for (int r = 0; r < 8; ++r) CHECK(perm[pr.order[r] - 1] + 1 == base.order[r]);
    const FeatureRanking scaled = feature_ranking(CoefMatrix(d * 3.5), 3);
    CHECK(scaled.order == base.order);
    for (int f = 0; f < 8; ++f) CHECK(scaled.relative_sdb[f] == doctest::Approx(base.relative_sdb[f]));
  }
}

TEST_CASE("prediction") {
  SUBCASE("zero chain gives uniform rows") {
    ChainRecord r;
    r.delta_draws.assign(3, CoefMatrix::Zero(4, 2));
    const Eigen::MatrixXd probs = predict(r, 0.0, random_x(5, 3, 1), PredictionMode::bayes_average);
    CHECK((probs.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("single draw: modes coincide") {
    const ChainRecord r = random_chain(1, 3, 2, 21);
    const Eigen::MatrixXd x = random_x(7, 3, 2);
    const Eigen::MatrixXd a = predict(r, 0.0, x, PredictionMode::bayes_average);
    const Eigen::MatrixXd b = predict(r, 0.0, x, PredictionMode::plugin_mean);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("bayes average matches a draw-by-draw accumulation") {
    const ChainRecord r = random_chain(40, 3, 2, 22, 2.0);
    const Eigen::MatrixXd x = random_x(6, 3, 3);
    const Eigen::MatrixXd got = predict(r, 0.25, x, PredictionMode::bayes_average);
    for (int i = 0; i < x.rows(); ++i) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(3);
      std::vector<double> xi(3);
      for (int j = 0; j < 3; ++j) xi[j] = x(i, j);
      for (std::size_t d = 10; d < 40; ++d) {
        const CoefMatrix& dl = r.delta_draws[d];
        // softmax over (0, eta_1, eta_2)
        std::array<double, 3> e{0.0, dl(0, 0), dl(0, 1)};
        for (int j = 0; j < 3; ++j) {
          e[1] += xi[j] * dl(j + 1, 0);
          e[2] += xi[j] * dl(j + 1, 1);
        }
        const double m = std::max({e[0], e[1], e[2]});
        double z = 0.0;
        for (double v : e) z += std::exp(v - m);
        for (int c = 0; c < 3; ++c) acc[c] += std::exp(e[c] - m) / z;
      }
      acc /= 30.0;
      for (int c = 0; c < 3; ++c) CHECK(got(i, c) == doctest::Approx(acc[c]).epsilon(1e-12));
      CHECK(std::abs(got.row(i).sum() - 1.0) < 1e-10);
    }
  }
  SUBCASE("two-draw asymmetric example") {
    ChainRecord r;
    CoefMatrix d(2, 1);
    d << 0.0, 0.0;
    r.delta_draws.push_back(d);
    d << 0.0, 2.0;
    r.delta_draws.push_back(d);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(1, 1);
    const double s2 = 1.0 / (1.0 + std::exp(-2.0));
    const double s1 = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(predict(r, 0.0, x, PredictionMode::bayes_average)(0, 1) ==
          doctest::Approx(0.5 * (0.5 + s2)).epsilon(1e-14));
    CHECK(predict(r, 0.0, x, PredictionMode::plugin_mean)(0, 1) == doctest::Approx(s1).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch") {
    const ChainRecord r = random_chain(2, 3, 1, 1);
    CHECK_THROWS_AS(predict(r, 0.0, random_x(2, 4, 1), PredictionMode::bayes_average), ValidationError);
  }
  SUBCASE("mode names") {
    CHECK(parse_prediction_mode(to_string(PredictionMode::plugin_mean)) == PredictionMode::plugin_mean);
    CHECK_THROWS_AS(parse_prediction_mode("median"), ValidationError);
  }
}

TEST_CASE("amlp") {
  const std::vector<int> y3{1, 3, 2, 2};
  CHECK(amlp(Eigen::MatrixXd::Constant(4, 3, 1.0 / 3.0), y3) == doctest::Approx(std::log(3.0)).epsilon(1e-15));

  Eigen::MatrixXd perfect = Eigen::MatrixXd::Zero(4, 3);
  for (int i = 0; i < 4; ++i) perfect(i, y3[i] - 1) = 1.0;
  CHECK(amlp(perfect, y3) == 0.0);

  Eigen::MatrixXd two(2, 2);
  two << 0.5, 0.5, 0.75, 0.25;
  const std::vector<int> y2{1, 2};
  CHECK(amlp(two, y2) == doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-15));

  Eigen::MatrixXd zero(1, 2);
  zero << 1.0, 0.0;
  const std::vector<int> y1{2};
  CHECK(std::isinf(amlp(zero, y1)));

  CHECK_THROWS_AS(amlp(two, y1), ValidationError);
  const std::vector<int> bad{1, 3};
  CHECK_THROWS_AS(amlp(two, bad), ValidationError);
}

TEST_CASE("amlp of the averaged predictive is at most the mean per-draw amlp") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ChainRecord r = random_chain(15, 4, 2, seed, 1.5);
    const Eigen::MatrixXd x = random_x(12, 4, seed + 100);
    std::mt19937_64 gen(seed);
    std::vector<int> y(12);
    for (int& v : y) v = static_cast<int>(gen() % 3) + 1;
    const double averaged = amlp(predict(r, 0.0, x, PredictionMode::bayes_average), y);
    double per_draw = 0.0;
    for (const CoefMatrix& d : r.delta_draws) {
      ChainRecord one;
      one.delta_draws.push_back(d);
      per_draw += amlp(predict(one, 0.0, x, PredictionMode::bayes_average), y);
    }
    CHECK(averaged <= per_draw / 15.0 + 1e-12);
  }
}

TEST_CASE("error rate") {
  const std::vector<int> ones{1, 1, 1};
  CHECK(error_rate(Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0), ones) == 0.0);

  Eigen::MatrixXd probs(4, 3);
  probs << 0.7, 0.2, 0.1,
           0.1, 0.8, 0.1,
           0.2, 0.3, 0.5,
           0.6, 0.3, 0.1;
  const std::vector<int> y{1, 2, 3, 2};
  CHECK(error_rate(probs, y) == 0.25);

  Eigen::MatrixXd tie(1, 2);
  tie << 0.5, 0.5;
  const std::vector<int> y2{2};
  CHECK(error_rate(tie, y2) == 1.0);

  const PredictionResult res = summarize_predictions(probs, y);
  CHECK(res.error_rate == 0.25);
  CHECK(res.amlp == doctest::Approx(-(std::log(0.7) + std::log(0.8) + std::log(0.5) + std::log(0.3)) / 4));
}

TEST_CASE("selection metrics") {
  using G = FeatureGroup;
  SUBCASE("five-feature example") {
    const FeatureRanking r = ranking_from_relative({1.0, 0.5, 0.05, 0.04, 0.03});
    const std::vector<G> truth{G::x1_signal, G::x2_correlated_signal, G::noise, G::noise, G::noise};
    const std::vector<double> t{0.1, 0.0, 1.0 + 1e-9};
    const auto m = selection_metrics(r, truth, t);
    REQUIRE(m.size() == 3);
    CHECK(m[0].n_retained == 2);
    CHECK(m[0].fpr == 0.0);
    CHECK(m[0].sensitivity == 1.0);
    CHECK(m[0].fdr == 0.0);
    CHECK(m[1].n_retained == 5);
    CHECK(m[1].sensitivity == 1.0);
    CHECK(m[1].fpr == 1.0);
    CHECK(m[1].fdr == doctest::Approx(0.6));
    CHECK(m[2].n_retained == 0);
    CHECK(m[2].fdr == 0.0);
    CHECK(m[2].sensitivity == 0.0);
  }
  SUBCASE("a correlated group counts once") {
    const FeatureRanking r = ranking_from_relative({1.0, 0.05, 0.5, 0.02, 0.3});
    const std::vector<G> truth{G::x1_signal, G::x2_correlated_signal, G::corr_group, G::corr_group, G::noise};
    const std::vector<double> t{0.1};
    const auto m = selection_metrics(r, truth, t);
    // units: x1, x2, group; retained x1, group member, noise
    CHECK(m[0].n_retained == 3);
    CHECK(m[0].sensitivity == doctest::Approx(2.0 / 3.0));
    CHECK(m[0].fpr == 1.0);
    CHECK(m[0].fdr == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("monotone in the threshold") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> unif;
    std::vector<double> rel(30);
    for (double& v : rel) v = unif(gen);
    std::vector<G> truth(30, G::noise);
    truth[0] = G::x1_signal;
    truth[1] = G::x2_correlated_signal;
    for (int j = 2; j < 6; ++j) truth[j] = G::corr_group;
    std::vector<double> t;
    for (int i = 0; i <= 50; ++i) t.push_back(i / 50.0);
    const auto m = selection_metrics(ranking_from_relative(rel), truth, t);
    for (std::size_t i = 1; i < m.size(); ++i) {
      CHECK(m[i].n_retained <= m[i - 1].n_retained);
      CHECK(m[i].sensitivity <= m[i - 1].sensitivity);
      CHECK(m[i].fpr <= m[i - 1].fpr);
    }
  }
  SUBCASE("errors") {
    const FeatureRanking r = ranking_from_relative({1.0, 0.5});
    const std::vector<double> t{0.1};
    CHECK_THROWS_AS(selection_metrics(r, std::vector<G>{}, t), ValidationError);
    CHECK_THROWS_AS(selection_metrics(r, std::vector<G>{G::noise}, t), ValidationError);
  }
  SUBCASE("group names") {
    for (G g : {G::x1_signal, G::x2_correlated_signal, G::corr_group, G::noise}) {
      CHECK(parse_feature_group(to_string(g)) == g);
    }
  }
}
