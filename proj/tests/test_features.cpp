#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <fstream>
#include <set>
#include <sstream>

#include "flowrisk/error.hpp"
#include "flowrisk/features.hpp"
#include "flowrisk/log.hpp"
#include "flowrisk/synth.hpp"
#include "test_util.hpp"

using namespace flowrisk;

namespace {

// Days from 0000-03-01 by the classic month-length table, independent of the
// library's civil-day conversion.
long long day_number(int y, unsigned m, unsigned d) {
  static const int cumulative[] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  auto leap = [](int yr) { return (yr % 4 == 0 && yr % 100 != 0) || yr % 400 == 0; };
  long long days = 0;
  for (int yr = 1900; yr < y; ++yr) days += leap(yr) ? 366 : 365;
  days += cumulative[m - 1] + d;
  if (m > 2 && leap(y)) ++days;
  return days;
}

MergedFlowline row(const std::string& id, const std::string& fluid, int risk) {
  MergedFlowline m;
  m.operational.source_row_id = id;
  m.operational.operator_number = "100";
  m.operational.flowline_id = "F" + id;
  m.operational.location_id = "L1";
  m.operational.status = "ACTIVE";
  m.operational.flowline_action = "REGISTRATION";
  m.operational.location_type = "WELL";
  m.operational.fluid_type = fluid;
  m.operational.material = "STEEL";
  m.operational.diameter_inches = 4;
  m.operational.length_feet = 300;
  m.operational.max_operating_pressure = 500;
  m.operational.construction_date = Date{2000, 1, 1};
  m.geometry = MultiLine{{PolyLine{{{0, 0}, {3, 4}}}}};
  m.risk = risk;
  return m;
}

Dataset labelled(const std::vector<int>& y) {
  Dataset ds;
  ds.X = DenseMatrix::Zero(static_cast<Eigen::Index>(y.size()), 1);
  ds.y = y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ds.X(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    ds.row_ids.push_back(std::to_string(i));
  }
  ds.columns.push_back({"x", ColumnMeta::Kind::Numeric, "", ""});
  return ds;
}

std::size_t count(const std::vector<int>& y, int label) {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
}

}  // namespace

TEST_CASE("line age") {
  CHECK(line_age({2020, 1, 1}, {2020, 1, 1}) == 0.0);
  CHECK(line_age({2010, 1, 1}, {2020, 1, 1}) == doctest::Approx(10.0).epsilon(0.001));
  CHECK_THROWS_AS(line_age({2021, 1, 1}, {2020, 1, 1}), Error);

  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> year(1950, 2030), month(1, 12), day(1, 28);
  for (int i = 0; i < 500; ++i) {
    auto draw = [&] { return Date{year(gen), static_cast<unsigned>(month(gen)), static_cast<unsigned>(day(gen))}; };
    Date a = draw(), b = draw();
    if (b < a) std::swap(a, b);
    const double expected =
        static_cast<double>(day_number(b.year, b.month, b.day) - day_number(a.year, a.month, a.day)) / 365.25;
    CHECK(line_age(a, b) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("geometry features") {
  const auto f = geometry_features(MultiLine{{PolyLine{{{0, 0}, {3, 4}}}}});
  CHECK(f.length_m == doctest::Approx(5.0));
  CHECK(f.n_lines == 1.0);
  CHECK(f.bbox_area_m2 == doctest::Approx(12.0));
  const auto g = geometry_features(MultiLine{{PolyLine{{{0, 0}, {1, 0}}}, PolyLine{{{0, 1}, {1, 1}}}}});
  CHECK(g.length_m == doctest::Approx(2.0));
  CHECK(g.n_lines == 2.0);
  CHECK(g.bbox_area_m2 == doctest::Approx(1.0));
}

TEST_CASE("one-hot encoding") {
  OneHotEncoder enc;
  enc.fit({"c"}, {{"A", "B", "A"}});
  const DenseMatrix X = enc.transform({{"A", "B", "A"}});
  REQUIRE(X.cols() == 2);
  CHECK(X.col(0) == Eigen::Vector3d(1, 0, 1));
  CHECK(X.col(1) == Eigen::Vector3d(0, 1, 0));
  CHECK(enc.columns()[0].name == "c=A");

  OneHotEncoder one;
  one.fit({"c"}, {{"Z", "Z"}});
  CHECK(one.transform({{"Z", "Z"}}) == DenseMatrix::Ones(2, 1));

  log::ScopedCapture capture;
  const DenseMatrix unseen = enc.transform({{"Q"}});
  CHECK(unseen.sum() == 0.0);
  CHECK_FALSE(capture.messages().empty());

  OneHotEncoder empty;
  CHECK_THROWS_AS(empty.fit({"c"}, {{}}), Error);
}

TEST_CASE("one-hot groups on random tables") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> cats(1, 6), rows(1, 40);
    const int n = rows(gen);
    std::vector<std::vector<std::string>> table(3);
    std::vector<std::set<std::string>> distinct(3);
    for (int c = 0; c < 3; ++c) {
      std::uniform_int_distribution<int> pick(0, cats(gen) - 1);
      for (int r = 0; r < n; ++r) {
        table[c].push_back("v" + std::to_string(pick(gen)));
        distinct[c].insert(table[c].back());
      }
    }
    OneHotEncoder enc;
    enc.fit({"a", "b", "c"}, table);
    const DenseMatrix X = enc.transform(table);
    CHECK(static_cast<std::size_t>(X.cols()) == distinct[0].size() + distinct[1].size() + distinct[2].size());
    Eigen::Index col = 0;
    for (int c = 0; c < 3; ++c) {
      const auto width = static_cast<Eigen::Index>(distinct[c].size());
      for (Eigen::Index r = 0; r < X.rows(); ++r) CHECK(X.row(r).segment(col, width).sum() == 1.0);
      col += width;
    }
  }
}

TEST_CASE("assemble schema") {
  const std::vector<MergedFlowline> rows{row("1", "CRUDE_OIL", 0), row("2", "NATURAL_GAS", 1)};
  FeatureConfig cfg;
  cfg.reference_date = Date{2020, 1, 1};
  const Dataset ds = assemble(rows, cfg);
  // operator 1, flowline_id 2, location_id 1, status 1, action 1, type 1, fluid 2, material 1
  CHECK(ds.cols() == 7 + 10);
  CHECK(ds.y == std::vector<int>{0, 1});
  CHECK(ds.X(0, 3) == doctest::Approx(20.0).epsilon(0.001));
  CHECK(ds.X(0, 4) == doctest::Approx(5.0));
  for (const auto& c : ds.columns) {
    CHECK(c.source_column != "root_cause_type");
    CHECK(c.name.find("root_cause") == std::string::npos);
  }
  CHECK(ds.X.allFinite());

  cfg.drop_id_like = true;
  const Dataset dropped = assemble(rows, cfg);
  CHECK(dropped.cols() == 7 + 7);
  for (const auto& c : dropped.columns) {
    CHECK(c.source_column != "flowline_id");
    CHECK(c.source_column != "location_id");
  }
  CHECK_THROWS_AS(assemble({}, cfg), Error);
}

TEST_CASE("generated dataset has the configured positive rate") {
  SynthConfig sc;
  sc.n_lines = 1000;
  sc.seed = 21;
  const auto out = generate(sc);
  std::set<std::string> sources;
  for (const auto& [spill, target] : out.truth.spills) sources.insert(*target);
  const double rate = static_cast<double>(sources.size()) / static_cast<double>(out.operational.size());
  CHECK(rate >= 0.005);
  CHECK(rate <= 0.02);
}

TEST_CASE("stratified split on small examples") {
  const auto ten = stratified_split(labelled({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}), 0.7, 3);
  CHECK(ten.train.rows() == 7);
  CHECK(ten.test.rows() == 3);
  const auto pos = count(ten.train.y, 1);
  CHECK((pos == 3 || pos == 4));

  std::vector<int> rare(100, 0);
  rare[10] = rare[20] = 1;
  const auto split = stratified_split(labelled(rare), 0.7, 3);
  CHECK(count(split.train.y, 1) == 1);
  CHECK(count(split.test.y, 1) == 1);
  CHECK(count(split.train.y, 0) == 69);

  std::vector<int> single(100, 0);
  single[5] = 1;
  try {
    stratified_split(labelled(single), 0.7, 3);
    FAIL("expected DegenerateClass");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateClass);
  }
}

TEST_CASE("stratified split determinism") {
  std::vector<int> y(60, 0);
  for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i * 3)] = 1;
  const auto ds = labelled(y);
  const auto a = stratified_split(ds, 0.7, 11), b = stratified_split(ds, 0.7, 11), c = stratified_split(ds, 0.7, 12);
  CHECK(a.train.row_ids == b.train.row_ids);
  CHECK(a.train.row_ids != c.train.row_ids);
  CHECK(count(a.train.y, 1) == count(c.train.y, 1));
}

TEST_CASE("standardize") {
  Dataset train;
  train.X.resize(2, 2);
  train.X << 0, 5, 2, 5;
  train.y = {0, 1};
  train.row_ids = {"a", "b"};
  log::ScopedCapture capture;
  const auto s = standardize(train, train);
  CHECK(s.train.X(0, 0) == doctest::Approx(-1.0));
  CHECK(s.train.X(1, 0) == doctest::Approx(1.0));
  CHECK(s.train.X(0, 1) == 5.0);
  CHECK_FALSE(capture.messages().empty());

  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd(3.0, 7.0);
  Dataset big;
  big.X.resize(200, 4);
  for (Eigen::Index i = 0; i < big.X.size(); ++i) big.X.data()[i] = nd(gen);
  const auto z = Standardizer::fit(big.X).transform(big.X);
  for (Eigen::Index c = 0; c < 4; ++c) {
    const double mean = z.col(c).mean();
    const double sd = std::sqrt((z.col(c).array() - mean).square().mean());
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(sd - 1.0) < 1e-12);
  }
}

TEST_CASE("dataset persistence with schema hash") {
  const std::vector<MergedFlowline> rows{row("1", "CRUDE_OIL", 0), row("2", "NATURAL_GAS", 1)};
  FeatureConfig cfg;
  cfg.reference_date = Date{2020, 1, 1};
  const Dataset ds = assemble(rows, cfg);
  const auto dir = testutil::scratch_dir("features_io");
  write_dataset(dir / "d.csv", ds, 77);
  std::uint64_t seed = 0;
  const Dataset back = read_dataset(dir / "d.csv", &seed);
  CHECK(seed == 77);
  CHECK(back.X == ds.X);
  CHECK(back.y == ds.y);
  CHECK(back.columns == ds.columns);
  CHECK(back.row_ids == ds.row_ids);

  // Renaming a column breaks the recorded hash.
  std::string text;
  {
    std::ifstream f(dir / "d.csv");
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  text.replace(text.find("diameter_in"), 11, "diameter_cm");
  std::ofstream(dir / "d.csv", std::ios::trunc) << text;
  try {
    read_dataset(dir / "d.csv");
    FAIL("expected SchemaHashMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaHashMismatch);
  }
}
