#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "flowrisk/artifacts.hpp"
#include "flowrisk/config.hpp"
#include "flowrisk/pipeline.hpp"
#include "flowrisk/svg.hpp"
#include "test_util.hpp"

using namespace flowrisk;
namespace pt = boost::property_tree;

namespace {

std::string binary() {
  const char* bin = std::getenv("FLOWLINE_RISK_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "FLOWLINE_RISK_BIN is not set");
  return bin;
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = "\"" + binary() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path small_config(const std::filesystem::path& dir, const std::string& extra = "") {
  const auto path = dir / "run.cfg";
  std::ofstream(path) << "# small synthetic run\n"
                         "input_mode = synth\n"
                         "seed = 17\n"
                         "synth.n_lines = 300\n"
                         "synth.area = 10000\n"
                         "synth.spill_rate = 0.06\n"
                         "drop_id_like = true\n"
                         "gbdt.n_trees = 30\n"
                         "rf.n_trees = 30\n"
                         "adaboost.n_stumps = 30\n"
                         "kmeans.n_init = 3\n"
                      << extra;
  return path;
}

void collect_text(const pt::ptree& node, std::vector<std::string>& out) {
  for (const auto& [name, child] : node) {
    if (name == "text") out.push_back(child.get_value<std::string>());
    collect_text(child, out);
  }
}

pt::ptree parse_svg(const std::filesystem::path& p) {
  pt::ptree tree;
  std::ifstream f(p);
  pt::read_xml(f, tree);
  return tree;
}

}  // namespace

TEST_CASE("run-all produces a valid, deterministic report") {
  const auto dir = testutil::scratch_dir("pipeline_run");
  const auto cfg = small_config(dir);
  const auto out1 = dir / "out1", out2 = dir / "out2";
  REQUIRE(run_cli("run-all --config \"" + cfg.string() + "\" --out \"" + out1.string() + "\"", dir / "a.log") == 0);
  REQUIRE(run_cli("run-all --config \"" + cfg.string() + "\" --out \"" + out2.string() + "\"", dir / "b.log") == 0);

  const auto report = read_json(out1 / "report.json");
  CHECK_NOTHROW(validate_report(report));
  CHECK(report.at("metric_rows").size() == 36);
  CHECK(strip_volatile(report) == strip_volatile(read_json(out2 / "report.json")));

  for (const auto& f : figure_files()) {
    REQUIRE(std::filesystem::exists(out1 / f));
    CHECK_NOTHROW(parse_svg(out1 / f));
    CHECK(slurp(out1 / f) == slurp(out2 / f));
  }
  CHECK(slurp(out1 / "tables/metrics.csv") == slurp(out2 / "tables/metrics.csv"));

  std::vector<std::string> texts;
  collect_text(parse_svg(out1 / "figures/silhouette.svg"), texts);
  for (const char* k : {"2", "3", "4", "5"}) CHECK(std::find(texts.begin(), texts.end(), k) != texts.end());

  // Re-running a single downstream stage reuses the committed artifacts.
  CHECK(run_cli("evaluate --config \"" + cfg.string() + "\" --out \"" + out1.string() + "\"", dir / "c.log") == 0);
  CHECK(std::filesystem::exists(out1 / "run.log"));
}

TEST_CASE("PCA off halves the metric table") {
  const auto dir = testutil::scratch_dir("pipeline_nopca");
  const auto cfg = small_config(dir);
  const auto out = dir / "out";
  REQUIRE(run_cli("run-all --pca off --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"",
                  dir / "a.log") == 0);
  const auto report = read_json(out / "report.json");
  CHECK(report.at("metric_rows").size() == 18);
  for (const auto& row : report.at("metric_rows")) CHECK(row.at("pca") == false);
}

TEST_CASE("missing upstream artifacts fail the stage") {
  const auto dir = testutil::scratch_dir("pipeline_missing");
  const auto cfg = small_config(dir);
  const auto out = dir / "out";
  CHECK(run_cli("train --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"", dir / "a.log") == 3);
  CHECK(slurp(dir / "a.log").find("MissingArtifact") != std::string::npos);
}

TEST_CASE("validation errors exit with code 2") {
  const auto dir = testutil::scratch_dir("pipeline_bad");
  std::ofstream(dir / "noseed.cfg") << "input_mode = synth\n";
  CHECK(run_cli("run-all --config \"" + (dir / "noseed.cfg").string() + "\"", dir / "a.log") == 2);
  std::ofstream(dir / "unknown.cfg") << "seed = 1\nbogus_key = 3\n";
  CHECK(run_cli("merge --config \"" + (dir / "unknown.cfg").string() + "\"", dir / "b.log") == 2);
  const auto cfg = small_config(dir);
  CHECK(run_cli("launch --config \"" + cfg.string() + "\"", dir / "c.log") == 2);
  CHECK(run_cli("merge --config \"" + (dir / "absent.cfg").string() + "\"", dir / "d.log") == 2);
  CHECK(run_cli("merge --ladder \"5,1\" --config \"" + cfg.string() + "\"", dir / "e.log") == 2);
  CHECK(run_cli("merge --pca maybe --config \"" + cfg.string() + "\"", dir / "f.log") == 2);
}

TEST_CASE("map with no high-risk lines still carries a legend") {
  MergedFlowline m;
  m.operational.source_row_id = "1";
  m.geometry = MultiLine{{PolyLine{{{0, 0}, {100, 50}}}}};
  const std::string svg = svg::map_figure({m}, "Map");
  std::istringstream in(svg);
  pt::ptree tree;
  CHECK_NOTHROW(pt::read_xml(in, tree));
  std::vector<std::string> texts;
  collect_text(tree, texts);
  CHECK(std::find(texts.begin(), texts.end(), "High risk") != texts.end());
  CHECK(std::find(texts.begin(), texts.end(), "Low risk") != texts.end());
  CHECK(svg.find(svg::kHighRiskColor) != std::string::npos);
}

TEST_CASE("report validation rejects malformed documents") {
  nlohmann::json bad = {{"schema_version", 1}};
  CHECK_THROWS_AS(validate_report(bad), Error);
  CHECK(parse_stage("run-all") == Stage::RunAll);
  CHECK_THROWS_AS(parse_stage("nope"), Error);
}
