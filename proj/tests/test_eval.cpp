#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "flowrisk/error.hpp"
#include "flowrisk/eval.hpp"
#include "flowrisk/ml.hpp"

using namespace flowrisk;

namespace {

DenseMatrix gaussian_blobs(std::uint64_t seed, const std::vector<Eigen::Vector2d>& centers, int per, double sd,
                           std::vector<int>* labels = nullptr) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, sd);
  DenseMatrix X(static_cast<Eigen::Index>(centers.size()) * per, 2);
  Eigen::Index r = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (int i = 0; i < per; ++i, ++r) {
      X(r, 0) = centers[c].x() + nd(gen);
      X(r, 1) = centers[c].y() + nd(gen);
      if (labels) labels->push_back(static_cast<int>(c));
    }
  }
  return X;
}

// Direct silhouette: per-point a(i), b(i) by explicit loops over labels.
double silhouette_oracle(const DenseMatrix& X, const std::vector<int>& a) {
  std::map<int, std::vector<Eigen::Index>> members;
  for (std::size_t i = 0; i < a.size(); ++i) members[a[i]].push_back(static_cast<Eigen::Index>(i));
  double total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& own = members[a[i]];
    if (own.size() == 1) continue;
    double ai = 0;
    for (auto j : own) ai += (X.row(static_cast<Eigen::Index>(i)) - X.row(j)).norm();
    ai /= static_cast<double>(own.size() - 1);
    double bi = std::numeric_limits<double>::infinity();
    for (const auto& [label, rows] : members) {
      if (label == a[i]) continue;
      double d = 0;
      for (auto j : rows) d += (X.row(static_cast<Eigen::Index>(i)) - X.row(j)).norm();
      bi = std::min(bi, d / static_cast<double>(rows.size()));
    }
    total += (bi - ai) / std::max(ai, bi);
  }
  return total / static_cast<double>(a.size());
}

MergedFlowline flowline(const std::string& id, const std::string& fluid, double diameter, Date built, int risk) {
  MergedFlowline m;
  m.operational.source_row_id = id;
  m.operational.operator_number = "10" + std::to_string(std::stoi(id) % 3);
  m.operational.fluid_type = fluid;
  m.operational.material = "STEEL";
  m.operational.diameter_inches = diameter;
  m.operational.construction_date = built;
  m.risk = risk;
  return m;
}

}  // namespace

TEST_CASE("confusion matrix matches a direct count") {
  std::mt19937_64 gen(1);
  std::bernoulli_distribution coin(0.3);
  for (int t = 0; t < 20; ++t) {
    std::vector<int> a, b;
    for (int i = 0; i < 200; ++i) {
      a.push_back(coin(gen));
      b.push_back(coin(gen));
    }
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] && b[i]) ++tp;
      if (!a[i] && b[i]) ++fp;
      if (a[i] && !b[i]) ++fn;
      if (!a[i] && !b[i]) ++tn;
    }
    CHECK(confusion(a, b) == ConfusionMatrix{tp, fp, fn, tn});
  }
  CHECK_THROWS_AS(confusion({0, 1}, {0}), Error);
  CHECK_THROWS_AS(confusion({0, 2}, {0, 1}), Error);
}

TEST_CASE("metric formulas") {
  CHECK(f1_score(0.80, 0.33) == doctest::Approx(0.467).epsilon(0.002));
  const Metrics m = metrics(ConfusionMatrix{8, 2, 4, 86});
  CHECK(m.accuracy == doctest::Approx(0.94));
  CHECK(m.precision == doctest::Approx(0.8));
  CHECK(m.recall == doctest::Approx(8.0 / 12.0));
  CHECK(m.f1 == doctest::Approx(2 * 0.8 * (8.0 / 12.0) / (0.8 + 8.0 / 12.0)));
  CHECK_FALSE(m.any_undefined());

  const Metrics none = metrics(ConfusionMatrix{0, 0, 5, 95});
  CHECK(none.precision == 0.0);
  CHECK(none.precision_undefined);
  CHECK_FALSE(none.recall_undefined);
  CHECK(none.f1 == 0.0);
  CHECK(none.f1_undefined);
}

TEST_CASE("perfect predictions score 1 under every averaging") {
  const std::vector<int> y{0, 1, 0, 1, 1, 0, 0};
  const auto rows = metric_rows("LR", false, y, y);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].averaging == Averaging::PositiveClass);
  CHECK(rows[1].averaging == Averaging::Macro);
  CHECK(rows[2].averaging == Averaging::Weighted);
  for (const auto& r : rows) {
    CHECK(r.accuracy == 1.0);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK_FALSE(r.undefined);
  }
}

TEST_CASE("majority-class predictor on a 99 to 1 test set") {
  std::vector<int> y(100, 0);
  y[42] = 1;
  const std::vector<int> pred(100, 0);
  const auto rows = metric_rows("KNN", true, y, pred);
  CHECK(rows[0].accuracy == doctest::Approx(0.99));
  CHECK(rows[0].precision == 0.0);
  CHECK(rows[0].recall == 0.0);
  CHECK(rows[0].f1 == 0.0);
  CHECK(rows[0].undefined);
  // Macro halves the class-0 scores: precision 0.99, recall 1.
  CHECK(rows[1].precision == doctest::Approx(0.99 / 2));
  CHECK(rows[1].recall == doctest::Approx(0.5));
  // Weighted by support 99:1.
  CHECK(rows[2].recall == doctest::Approx(0.99));
  CHECK(rows[2].precision == doctest::Approx(0.99 * 0.99));
  for (const auto& r : rows) {
    for (double v : {r.accuracy, r.precision, r.recall, r.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("metric table covers each model and averaging") {
  DenseMatrix X(6, 1);
  X << 0, 1, 2, 10, 11, 12;
  const std::vector<int> y{0, 0, 0, 1, 1, 1};
  ml::LogisticRegression lr;
  lr.fit(X, y);
  ml::KNearestNeighbors knn(ml::KnnParams{1});
  knn.fit(X, y);
  const auto rows = metric_table({&lr, &knn}, X, y, true);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].model == "LR");
  CHECK(rows[3].model == "KNN");
  CHECK(rows[5].pca);
  CHECK(rows[5].to_json().at("averaging") == "weighted");
  CHECK_THROWS_AS(metric_table({&lr}, X, std::vector<int>(6, 0), false), Error);
}

TEST_CASE("silhouette hand example and edge cases") {
  DenseMatrix X(4, 1);
  X << 0, 1, 10, 11;
  // Point 0: a = 1, b = (10 + 11) / 2 = 10.5, s = 1 - 1 / 10.5.
  const double s0 = 1.0 - 1.0 / 10.5, s1 = 1.0 - 1.0 / 9.5;
  CHECK(silhouette(X, {0, 0, 1, 1}) == doctest::Approx((s0 + s1 + s1 + s0) / 4));
  CHECK(silhouette(X, {5, 5, 2, 2}) == doctest::Approx(silhouette(X, {0, 0, 1, 1})));

  DenseMatrix three(3, 1);
  three << 0, 1, 5;
  // The singleton scores 0.
  CHECK(silhouette(three, {0, 0, 1}) == doctest::Approx((1.0 - 1.0 / 5.0 + 1.0 - 1.0 / 4.0) / 3.0));

  CHECK_THROWS_AS(silhouette(X, {0, 0, 0, 0}), Error);
  CHECK_THROWS_AS(silhouette(X, {0, 1}), Error);

  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int t = 0; t < 10; ++t) {
    const DenseMatrix R = gaussian_blobs(static_cast<std::uint64_t>(t), {{0, 0}}, 40, 1.0);
    std::vector<int> a;
    for (int i = 0; i < 40; ++i) a.push_back(lab(gen));
    a[0] = 0;
    a[1] = 1;
    const double s = silhouette(R, a);
    CHECK(s == doctest::Approx(silhouette_oracle(R, a)).epsilon(1e-12));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("silhouette sweep finds the generating cluster count") {
  const DenseMatrix two = gaussian_blobs(4, {{0, 0}, {20, 0}}, 50, 1.0);
  const auto s2 = silhouette_sweep(two, 2, 5, 7);
  CHECK(s2.ks == std::vector<int>{2, 3, 4, 5});
  CHECK(s2.scores.size() == 4);
  CHECK(s2.best_k == 2);

  std::vector<int> truth;
  const DenseMatrix three = gaussian_blobs(5, {{0, 0}, {20, 0}, {10, 18}}, 50, 1.0, &truth);
  const auto s3 = silhouette_sweep(three, 2, 5, 7);
  CHECK(s3.best_k == 3);
  CHECK(silhouette(three, truth) > 0.8);
  CHECK(*std::max_element(s3.scores.begin(), s3.scores.end()) == s3.scores[1]);

  CHECK_THROWS_AS(silhouette_sweep(two, 1, 3, 0), Error);
  CHECK_THROWS_AS(silhouette_sweep(two.topRows(3), 2, 5, 0), Error);
}

TEST_CASE("EDA frequency tables") {
  std::vector<MergedFlowline> rows;
  for (int i = 0; i < 1000; ++i) {
    rows.push_back(flowline(std::to_string(i), "CRUDE_OIL", i % 2 ? 2.0 : 4.0, Date{2000 + i % 20, 6, 1},
                            i < 10 ? 1 : 0));
  }
  EdaConfig cfg;
  cfg.reference_date = Date{2024, 1, 1};
  const auto tables = eda_summaries(rows, cfg);
  REQUIRE(tables.size() == 6);
  CHECK(tables[0].name == "risk");
  REQUIRE(tables[0].rows.size() == 1);
  CHECK(tables[0].proportion(0, 0) == doctest::Approx(0.99));
  CHECK(tables[0].proportion(0, 1) == doctest::Approx(0.01));

  const auto& fluid = tables[3];
  CHECK(fluid.name == "fluid_type");
  REQUIRE(fluid.rows.size() == 1);
  CHECK(fluid.rows[0].category == "CRUDE_OIL");
  CHECK(fluid.rows[0].high == 10);

  for (const auto& t : tables) {
    CHECK(t.total() == 1000);
    double sum = 0, high = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      sum += t.proportion(r, 0) + t.proportion(r, 1);
      high += static_cast<double>(t.rows[r].high);
    }
    CHECK(sum == doctest::Approx(1.0));
    CHECK(high == 10.0);
  }

  const auto& diameter = tables[2];
  REQUIRE(diameter.rows.size() == 2);
  CHECK(diameter.rows[0].category == "2");
  CHECK(diameter.rows[1].category == "4");
  CHECK(diameter.rows[0].low + diameter.rows[0].high == 500);

  const auto& age = tables[1];
  std::size_t age_total = 0;
  for (const auto& r : age.rows) {
    CHECK(r.category.front() == '[');
    age_total += r.low + r.high;
  }
  CHECK(age_total == 1000);
  CHECK(tables[5].rows.size() == 3);
}
