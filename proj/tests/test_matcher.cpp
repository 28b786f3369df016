#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "flowrisk/error.hpp"
#include "flowrisk/matcher.hpp"
#include "flowrisk/synth.hpp"

using namespace flowrisk;

namespace {

const Point2D kOrigin(480000.0, 4400000.0);

// Geographic point that projects exactly onto the returned coordinates.
std::pair<GeoPoint, Point2D> anchor(const Point2D& offset) {
  const GeoPoint g = unproject(kOrigin + offset);
  return {g, project(g)};
}

OperationalFlowline op_record(const std::string& id, const std::string& op, const GeoPoint& s, const GeoPoint& e) {
  OperationalFlowline r;
  r.source_row_id = id;
  r.operator_name = op;
  r.start = s;
  r.end = e;
  r.construction_date = Date{2000, 1, 1};
  return r;
}

DescriptiveFlowline desc_line(const std::string& id, const std::string& op, std::vector<Point2D> pts) {
  return {id, op, MultiLine{{PolyLine{std::move(pts)}}}};
}

// Ladder walk exactly as described: the first step with a surviving
// operator-verified candidate wins; no spatial index.
std::map<std::string, std::pair<std::string, double>> oracle_match(const std::vector<OperationalFlowline>& ops,
                                                                   const std::vector<DescriptiveFlowline>& desc,
                                                                   const ToleranceLadder& ladder) {
  std::map<std::string, std::pair<std::string, double>> out;
  for (const auto& r : ops) {
    const Point2D s = project(r.start), e = project(r.end);
    if ((s - e).norm() <= 1e-6) continue;
    for (double t : ladder.steps) {
      const DescriptiveFlowline* best = nullptr;
      double best_sum = 0.0;
      for (const auto& d : desc) {
        if (normalize_operator_name(d.operator_name) != normalize_operator_name(r.operator_name)) continue;
        double ds = INFINITY, de = INFINITY;
        for (const auto& line : d.geometry.lines) {
          for (const auto* v : {&line.vertices.front(), &line.vertices.back()}) {
            ds = std::min(ds, (*v - s).norm());
            de = std::min(de, (*v - e).norm());
          }
        }
        if (ds > t || de > t) continue;
        const double sum = ds + de;
        if (!best || sum < best_sum || (sum == best_sum && std::stoll(d.source_row_id) < std::stoll(best->source_row_id))) {
          best = &d;
          best_sum = sum;
        }
      }
      if (best) {
        out[r.source_row_id] = {best->source_row_id, t};
        break;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("interpolate_line") {
  const auto [a, pa] = anchor({0, 0});
  const auto [b, pb] = anchor({100, 0});
  const PolyLine line = interpolate_line(op_record("1", "x", a, b));
  CHECK(polyline_length(line) == doctest::Approx(100.0).epsilon(1e-9));
  CHECK((line.vertices[0] - pa).norm() < 1e-6);
  try {
    interpolate_line(op_record("2", "x", a, a));
    FAIL("expected DegenerateLine");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateLine);
  }
}

TEST_CASE("exact coincidence matches at step zero") {
  const auto [a, pa] = anchor({0, 0});
  const auto [b, pb] = anchor({300, 40});
  const auto result = match_flowlines({op_record("1", "Acme Energy", a, b)},
                                      {desc_line("9", "ACME ENERGY", {pa, pb})}, ToleranceLadder{});
  REQUIRE(result.merged.size() == 1);
  CHECK(result.merged[0].descriptive_id == "9");
  CHECK(result.merged[0].match_tolerance == 0.0);
  CHECK(result.merged[0].d_start == 0.0);
  CHECK(result.merged[0].d_end == 0.0);
  REQUIRE(result.audit.size() == 1);
  CHECK(result.audit[0].chosen_id == std::optional<std::string>("9"));
}

TEST_CASE("operator mismatch within tolerance leaves the record unmatched") {
  const auto [a, pa] = anchor({0, 0});
  const auto [b, pb] = anchor({300, 0});
  const auto result =
      match_flowlines({op_record("1", "Acme", a, b)}, {desc_line("9", "Other Co", {pa, pb})}, ToleranceLadder{});
  CHECK(result.merged.empty());
  CHECK(result.unmatched == std::vector<std::string>{"1"});
  REQUIRE(result.audit.size() == 1);
  CHECK_FALSE(result.audit[0].chosen_id.has_value());
  CHECK(result.audit[0].n_candidates == 1);
}

TEST_CASE("correct operator at 10 m beats a wrong operator at 3 m") {
  const auto [a, pa] = anchor({0, 0});
  const auto [b, pb] = anchor({300, 0});
  const Point2D up3(0, 3), up10(0, 10);
  const auto result = match_flowlines(
      {op_record("1", "Acme", a, b)},
      {desc_line("1", "Other", {pa + up3, pb + up3}), desc_line("2", "Acme", {pa + up10, pb + up10})},
      ToleranceLadder{});
  REQUIRE(result.merged.size() == 1);
  CHECK(result.merged[0].descriptive_id == "2");
  CHECK(result.merged[0].match_tolerance == 10.0);
  CHECK(result.audit[0].n_candidates == 2);
}

TEST_CASE("ties on total distance go to the smaller descriptive id") {
  const auto [a, pa] = anchor({0, 0});
  const auto [b, pb] = anchor({300, 0});
  const Point2D up(0, 4), down(0, -4);
  const auto result = match_flowlines(
      {op_record("1", "Acme", a, b)},
      {desc_line("10", "Acme", {pa + up, pb + up}), desc_line("9", "Acme", {pa + down, pb + down})}, ToleranceLadder{});
  REQUIRE(result.merged.size() == 1);
  CHECK(result.merged[0].descriptive_id == "9");
}

TEST_CASE("matcher equals a brute-force ladder walk on crowded synthetic data") {
  SynthConfig cfg;
  cfg.n_lines = 300;
  cfg.area = 1000;
  cfg.min_separation = 10;
  cfg.operator_reuse_clustering = 0.8;
  cfg.n_operators = 5;
  cfg.seed = 3;
  const auto out = generate(cfg);
  const ToleranceLadder ladder;
  const auto result = match_flowlines(out.operational, out.descriptive, ladder);
  const auto oracle = oracle_match(out.operational, out.descriptive, ladder);
  CHECK(result.merged.size() == oracle.size());
  for (const auto& m : result.merged) {
    auto it = oracle.find(m.id());
    REQUIRE(it != oracle.end());
    CHECK(m.descriptive_id == it->second.first);
    CHECK(m.match_tolerance == it->second.second);
    CHECK(std::max(m.d_start, m.d_end) <= m.match_tolerance);
  }
  CHECK(result.merged.size() + result.unmatched.size() == out.operational.size());
}

TEST_CASE("extending the ladder never changes an existing match") {
  SynthConfig cfg;
  cfg.n_lines = 200;
  cfg.area = 1000;
  cfg.min_separation = 10;
  cfg.operator_reuse_clustering = 0.8;
  cfg.endpoint_jitter_sigma = 8;
  cfg.seed = 8;
  const auto out = generate(cfg);
  const auto short_run = match_flowlines(out.operational, out.descriptive, ToleranceLadder::parse("0,1,2,5,10"));
  const auto long_run = match_flowlines(out.operational, out.descriptive, ToleranceLadder{});
  std::map<std::string, std::string> long_map;
  for (const auto& m : long_run.merged) long_map[m.id()] = m.descriptive_id;
  for (const auto& m : short_run.merged) CHECK(long_map.at(m.id()) == m.descriptive_id);
  CHECK(long_run.merged.size() >= short_run.merged.size());
}

TEST_CASE("generated records recover their projected endpoints") {
  SynthConfig cfg;
  cfg.n_lines = 10;
  cfg.endpoint_jitter_sigma = 0;
  cfg.seed = 4;
  const auto out = generate(cfg);
  const auto result = match_flowlines(out.operational, out.descriptive, ToleranceLadder{});
  REQUIRE(result.merged.size() == 10);
  for (const auto& m : result.merged) {
    CHECK(m.match_tolerance == 0.0);
    const PolyLine line = interpolate_line(m.operational);
    CHECK((line.vertices.front() - m.geometry.lines.front().vertices.front()).norm() < 1e-6);
    CHECK((line.vertices.back() - m.geometry.lines.back().vertices.back()).norm() < 1e-6);
  }
}

TEST_CASE("spill attribution") {
  const auto [a, pa] = anchor({0, 0});
  const auto [b, pb] = anchor({300, 0});
  auto merged = match_flowlines({op_record("1", "Acme", a, b)}, {desc_line("9", "Acme", {pa, pb})}, ToleranceLadder{})
                    .merged;
  REQUIRE(merged.size() == 1);
  const auto [on_line, p_on] = anchor({0, 0});
  const auto [far, p_far] = anchor({150, 30});
  const auto [near, p_near] = anchor({150, 7});
  std::vector<SpillRecord> spills{{"s1", "ACME", on_line, "c", Date{2020, 1, 1}},
                                  {"s2", "Acme", far, "c", Date{2020, 1, 1}},
                                  {"s3", "Acme", near, "c", Date{2020, 1, 1}},
                                  {"s4", "Other", near, "c", Date{2020, 1, 1}}};
  const auto attr = match_spills(spills, merged, ToleranceLadder{});
  REQUIRE(attr.size() == 4);
  CHECK(attr[0].flowline_id == std::optional<std::string>("1"));
  CHECK(attr[0].distance == 0.0);
  CHECK(attr[0].tolerance_used == 0.0);
  CHECK_FALSE(attr[1].flowline_id.has_value());
  CHECK(std::isnan(attr[1].distance));
  CHECK(attr[2].flowline_id == std::optional<std::string>("1"));
  CHECK(attr[2].distance == doctest::Approx(7.0).epsilon(1e-6));
  CHECK(attr[2].tolerance_used == 10.0);
  CHECK_FALSE(attr[3].flowline_id.has_value());
}

TEST_CASE("risk assignment") {
  MergedFlowline a, b;
  a.operational.source_row_id = "1";
  b.operational.source_row_id = "2";
  const auto none = assign_risk({a, b}, {});
  CHECK(none[0].risk == 0);
  CHECK(none[1].risk == 0);
  const auto twice = assign_risk({a, b}, {{"s1", "2", 1.0, 1.0}, {"s2", "2", 2.0, 2.0}});
  CHECK(twice[0].risk == 0);
  CHECK(twice[1].risk == 1);
  try {
    assign_risk({a}, {{"s1", "7", 1.0, 1.0}});
    FAIL("expected DanglingReference");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DanglingReference);
  }
}

TEST_CASE("ladder parsing") {
  CHECK(ToleranceLadder::parse("0, 1,2.5").steps == std::vector<double>{0, 1, 2.5});
  CHECK_THROWS_AS(ToleranceLadder::parse("0,2,1"), Error);
  CHECK_THROWS_AS(ToleranceLadder::parse("0,x"), Error);
  CHECK(ToleranceLadder{}.to_string() == "0,1,2,5,10,15,20,25");
}

TEST_CASE("audit trail CSV") {
  std::ostringstream out;
  write_audit(out, {{"1", 5.0, 2, std::string("9"), 1.5, 2.5}, {"2", 25.0, 0, std::nullopt, 0, 0}});
  CHECK(out.str() == "record_id,step_reached,n_candidates,chosen_id,d_start,d_end\n1,5,2,9,1.5,2.5\n2,25,0,,,\n");
}
