#include "flowrisk/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "flowrisk/csv.hpp"
#include "flowrisk/error.hpp"
#include "flowrisk/ingest.hpp"

namespace flowrisk {
namespace {

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorKind::ConfigError, "config key '" + key + "' = '" + value + "': " + why);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) bad(key, v, "expected a number");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) bad(key, v, "expected an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  bad(key, v, "expected true/false");
}

ml::ClassWeight to_weight(const std::string& key, const std::string& v) {
  try {
    return ml::parse_class_weight(v);
  } catch (const Error&) {
    bad(key, v, "expected none or balanced");
  }
}

std::string fmt(double v) { return csv::format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&, const std::filesystem::path&)>;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  return p.is_relative() && !base.empty() ? base / p : p;
}

const std::map<std::string, Setter>& setters() {
  using P = std::filesystem::path;
  using S = std::string;
  static const std::map<std::string, Setter> table = {
      {"input_mode",
       [](RunConfig& c, const S& k, const S& v, const P&) {
         if (v == "synth") c.input_mode = InputMode::Synth;
         else if (v == "files") c.input_mode = InputMode::Files;
         else bad(k, v, "expected synth or files");
       }},
      {"descriptive", [](RunConfig& c, const S&, const S& v, const P& b) { c.descriptive_path = resolve(b, v); }},
      {"operational", [](RunConfig& c, const S&, const S& v, const P& b) { c.operational_path = resolve(b, v); }},
      {"spills", [](RunConfig& c, const S&, const S& v, const P& b) { c.spills_path = resolve(b, v); }},
      {"categories",
       [](RunConfig& c, const S&, const S& v, const P& b) { c.categories_path = v.empty() ? P{} : resolve(b, v); }},
      {"descriptive_geographic",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.descriptive_geographic = to_bool(k, v); }},
      {"synth.n_lines",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.n_lines = to_int<std::size_t>(k, v); }},
      {"synth.area", [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.area = to_double(k, v); }},
      {"synth.origin_x", [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.origin_x = to_double(k, v); }},
      {"synth.origin_y", [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.origin_y = to_double(k, v); }},
      {"synth.min_separation",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.min_separation = to_double(k, v); }},
      {"synth.endpoint_jitter_sigma",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.endpoint_jitter_sigma = to_double(k, v); }},
      {"synth.spill_rate", [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.spill_rate = to_double(k, v); }},
      {"synth.spill_lateral_sigma",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.spill_lateral_sigma = to_double(k, v); }},
      {"synth.n_operators",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.n_operators = to_int<std::size_t>(k, v); }},
      {"synth.operator_reuse_clustering",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.operator_reuse_clustering = to_double(k, v); }},
      {"synth.operational_fraction",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.operational_fraction = to_double(k, v); }},
      {"synth.n_orphan_spills",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.n_orphan_spills = to_int<std::size_t>(k, v); }},
      {"synth.segment_length",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.synth.segment_length = to_double(k, v); }},
      {"ladder",
       [](RunConfig& c, const S& k, const S& v, const P&) {
         try {
           c.ladder = ToleranceLadder::parse(v);
         } catch (const Error& e) {
           bad(k, v, e.what());
         }
       }},
      {"match_mode",
       [](RunConfig& c, const S& k, const S& v, const P&) {
         if (v == "endpoints") c.match_mode = ProximityMode::Endpoints;
         else if (v == "geometry") c.match_mode = ProximityMode::Geometry;
         else bad(k, v, "expected endpoints or geometry");
       }},
      {"projection.central_meridian",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.projection.central_meridian = to_double(k, v); }},
      {"projection.scale_factor",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.projection.scale_factor = to_double(k, v); }},
      {"projection.false_easting",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.projection.false_easting = to_double(k, v); }},
      {"projection.false_northing",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.projection.false_northing = to_double(k, v); }},
      {"projection.semi_major_axis",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.projection.semi_major_axis = to_double(k, v); }},
      {"projection.inverse_flattening",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.projection.flattening = 1.0 / to_double(k, v); }},
      {"reference_date",
       [](RunConfig& c, const S& k, const S& v, const P&) {
         auto d = Date::parse(v);
         if (!d) bad(k, v, "expected YYYY-MM-DD");
         c.reference_date = *d;
       }},
      {"drop_id_like", [](RunConfig& c, const S& k, const S& v, const P&) { c.drop_id_like = to_bool(k, v); }},
      {"line_count_mode",
       [](RunConfig& c, const S& k, const S& v, const P&) {
         if (v == "polylines") c.line_count_mode = LineCountMode::Polylines;
         else if (v == "segments") c.line_count_mode = LineCountMode::Segments;
         else bad(k, v, "expected polylines or segments");
       }},
      {"pca", [](RunConfig& c, const S& k, const S& v, const P&) { c.pca = to_bool(k, v); }},
      {"pca_k", [](RunConfig& c, const S& k, const S& v, const P&) { c.pca_k = to_int<int>(k, v); }},
      {"pca_variance", [](RunConfig& c, const S& k, const S& v, const P&) { c.pca_variance = to_double(k, v); }},
      {"train_fraction", [](RunConfig& c, const S& k, const S& v, const P&) { c.train_fraction = to_double(k, v); }},
      {"class_weight",
       [](RunConfig& c, const S& k, const S& v, const P&) {
         const auto w = to_weight(k, v);
         c.models.lr.class_weight = w;
         c.models.svm.class_weight = w;
         c.models.tree.class_weight = w;
         c.models.rf.class_weight = w;
       }},
      {"lr.learning_rate",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.models.lr.learning_rate = to_double(k, v); }},
      {"lr.epochs", [](RunConfig& c, const S& k, const S& v, const P&) { c.models.lr.epochs = to_int<int>(k, v); }},
      {"lr.l2", [](RunConfig& c, const S& k, const S& v, const P&) { c.models.lr.l2 = to_double(k, v); }},
      {"knn.k", [](RunConfig& c, const S& k, const S& v, const P&) { c.models.knn.k = to_int<int>(k, v); }},
      {"svm.C", [](RunConfig& c, const S& k, const S& v, const P&) { c.models.svm.C = to_double(k, v); }},
      {"svm.epochs", [](RunConfig& c, const S& k, const S& v, const P&) { c.models.svm.epochs = to_int<int>(k, v); }},
      {"gbdt.n_trees",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.models.gbdt.n_trees = to_int<int>(k, v); }},
      {"gbdt.max_depth",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.models.gbdt.max_depth = to_int<int>(k, v); }},
      {"gbdt.shrinkage",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.models.gbdt.shrinkage = to_double(k, v); }},
      {"gbdt.min_leaf",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.models.gbdt.min_leaf = to_int<int>(k, v); }},
      {"adaboost.n_stumps",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.models.adaboost.n_stumps = to_int<int>(k, v); }},
      {"rf.n_trees", [](RunConfig& c, const S& k, const S& v, const P&) { c.models.rf.n_trees = to_int<int>(k, v); }},
      {"rf.max_depth",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.models.rf.max_depth = to_int<int>(k, v); }},
      {"rf.min_leaf", [](RunConfig& c, const S& k, const S& v, const P&) { c.models.rf.min_leaf = to_int<int>(k, v); }},
      {"rf.mtry", [](RunConfig& c, const S& k, const S& v, const P&) { c.models.rf.mtry = to_int<int>(k, v); }},
      {"rf.bootstrap", [](RunConfig& c, const S& k, const S& v, const P&) { c.models.rf.bootstrap = to_bool(k, v); }},
      {"kmeans.k_min", [](RunConfig& c, const S& k, const S& v, const P&) { c.kmeans_k_min = to_int<int>(k, v); }},
      {"kmeans.k_max", [](RunConfig& c, const S& k, const S& v, const P&) { c.kmeans_k_max = to_int<int>(k, v); }},
      {"kmeans.n_init", [](RunConfig& c, const S& k, const S& v, const P&) { c.kmeans_n_init = to_int<int>(k, v); }},
      {"kmeans.max_iter",
       [](RunConfig& c, const S& k, const S& v, const P&) { c.kmeans_max_iter = to_int<int>(k, v); }},
      {"eda.age_bin_years", [](RunConfig& c, const S& k, const S& v, const P&) { c.age_bin_years = to_double(k, v); }},
      {"seed", [](RunConfig& c, const S& k, const S& v, const P&) { c.seed = to_int<std::uint64_t>(k, v); }},
      {"out_dir", [](RunConfig& c, const S&, const S& v, const P& b) { c.out_dir = resolve(b, v); }},
      {"threads", [](RunConfig& c, const S& k, const S& v, const P&) { c.threads = to_int<unsigned>(k, v); }},
  };
  return table;
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                      const std::filesystem::path& base) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorKind::ConfigError, "unknown config key '" + key + "'");
  it->second(cfg, key, value, base);
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), base);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::FileUnreadable, "cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); };
  if (!seed) fail("seed is mandatory");
  if (input_mode == InputMode::Files) {
    for (const auto& [name, p] : {std::pair<const char*, const std::filesystem::path*>{"descriptive", &descriptive_path},
                                  {"operational", &operational_path},
                                  {"spills", &spills_path}}) {
      if (p->empty()) fail(std::string(name) + " path is required in files mode");
      if (!std::filesystem::exists(*p)) fail(std::string(name) + " file does not exist: " + p->string());
    }
  }
  if (!categories_path.empty() && !std::filesystem::exists(categories_path)) {
    fail("categories file does not exist: " + categories_path.string());
  }
  try {
    ladder.validate();
    projection.validate();
    if (input_mode == InputMode::Synth) synth.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must be in (0,1)");
  if (pca_k < 0) fail("pca_k must be >= 0");
  if (!(pca_variance > 0.0 && pca_variance <= 1.0)) fail("pca_variance must be in (0,1]");
  if (kmeans_k_min < 2 || kmeans_k_max < kmeans_k_min) fail("need 2 <= kmeans.k_min <= kmeans.k_max");
  if (kmeans_n_init < 1 || kmeans_max_iter < 1) fail("kmeans.n_init and kmeans.max_iter must be >= 1");
  if (!(age_bin_years > 0.0)) fail("eda.age_bin_years must be > 0");
  if (models.knn.k < 1) fail("knn.k must be >= 1");
  if (models.lr.epochs < 1 || models.svm.epochs < 1) fail("epochs must be >= 1");
  if (models.gbdt.n_trees < 1 || models.rf.n_trees < 1 || models.adaboost.n_stumps < 1) {
    fail("ensemble sizes must be >= 1");
  }
  if (threads < 1) fail("threads must be >= 1");
}

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> e;
  e["input_mode"] = input_mode == InputMode::Synth ? "synth" : "files";
  if (input_mode == InputMode::Files) {
    e["descriptive"] = descriptive_path.generic_string();
    e["operational"] = operational_path.generic_string();
    e["spills"] = spills_path.generic_string();
    e["descriptive_geographic"] = fmt(descriptive_geographic);
  } else {
    e["synth.n_lines"] = std::to_string(synth.n_lines);
    e["synth.area"] = fmt(synth.area);
    e["synth.origin_x"] = fmt(synth.origin_x);
    e["synth.origin_y"] = fmt(synth.origin_y);
    e["synth.min_separation"] = fmt(synth.min_separation);
    e["synth.endpoint_jitter_sigma"] = fmt(synth.endpoint_jitter_sigma);
    e["synth.spill_rate"] = fmt(synth.spill_rate);
    e["synth.spill_lateral_sigma"] = fmt(synth.spill_lateral_sigma);
    e["synth.n_operators"] = std::to_string(synth.n_operators);
    e["synth.operator_reuse_clustering"] = fmt(synth.operator_reuse_clustering);
    e["synth.operational_fraction"] = fmt(synth.operational_fraction);
    e["synth.n_orphan_spills"] = std::to_string(synth.n_orphan_spills);
    e["synth.segment_length"] = fmt(synth.segment_length);
  }
  e["categories"] = categories_path.generic_string();
  e["ladder"] = ladder.to_string();
  e["match_mode"] = match_mode == ProximityMode::Endpoints ? "endpoints" : "geometry";
  e["projection.central_meridian"] = fmt(projection.central_meridian);
  e["projection.scale_factor"] = fmt(projection.scale_factor);
  e["projection.false_easting"] = fmt(projection.false_easting);
  e["projection.false_northing"] = fmt(projection.false_northing);
  e["projection.semi_major_axis"] = fmt(projection.semi_major_axis);
  e["projection.inverse_flattening"] = fmt(1.0 / projection.flattening);
  e["reference_date"] = reference_date.to_string();
  e["drop_id_like"] = fmt(drop_id_like);
  e["line_count_mode"] = line_count_mode == LineCountMode::Polylines ? "polylines" : "segments";
  e["pca"] = fmt(pca);
  e["pca_k"] = std::to_string(pca_k);
  e["pca_variance"] = fmt(pca_variance);
  e["train_fraction"] = fmt(train_fraction);
  e["class_weight"] = std::string(ml::to_string(models.lr.class_weight));
  e["lr.learning_rate"] = fmt(models.lr.learning_rate);
  e["lr.epochs"] = std::to_string(models.lr.epochs);
  e["lr.l2"] = fmt(models.lr.l2);
  e["knn.k"] = std::to_string(models.knn.k);
  e["svm.C"] = fmt(models.svm.C);
  e["svm.epochs"] = std::to_string(models.svm.epochs);
  e["gbdt.n_trees"] = std::to_string(models.gbdt.n_trees);
  e["gbdt.max_depth"] = std::to_string(models.gbdt.max_depth);
  e["gbdt.shrinkage"] = fmt(models.gbdt.shrinkage);
  e["gbdt.min_leaf"] = std::to_string(models.gbdt.min_leaf);
  e["adaboost.n_stumps"] = std::to_string(models.adaboost.n_stumps);
  e["rf.n_trees"] = std::to_string(models.rf.n_trees);
  e["rf.max_depth"] = std::to_string(models.rf.max_depth);
  e["rf.min_leaf"] = std::to_string(models.rf.min_leaf);
  e["rf.mtry"] = std::to_string(models.rf.mtry);
  e["rf.bootstrap"] = fmt(models.rf.bootstrap);
  e["kmeans.k_min"] = std::to_string(kmeans_k_min);
  e["kmeans.k_max"] = std::to_string(kmeans_k_max);
  e["kmeans.n_init"] = std::to_string(kmeans_n_init);
  e["kmeans.max_iter"] = std::to_string(kmeans_max_iter);
  e["eda.age_bin_years"] = fmt(age_bin_years);
  e["seed"] = seed ? std::to_string(*seed) : "";
  // out_dir and threads do not change results and stay out of the hash.
  return e;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : echo()) {
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

RunConfig synthetic_run_config(char scenario, std::uint64_t seed, const std::filesystem::path& out_dir) {
  RunConfig cfg;
  cfg.input_mode = InputMode::Synth;
  cfg.seed = seed;
  cfg.out_dir = out_dir;
  cfg.drop_id_like = true;
  cfg.synth.n_lines = 1000;
  cfg.synth.endpoint_jitter_sigma = 5.0;
  cfg.synth.spill_lateral_sigma = 8.0;
  if (scenario == 'b' || scenario == 'B') {
    cfg.synth.area = 2000.0;
    cfg.synth.min_separation = 10.0;
    cfg.synth.operator_reuse_clustering = 0.8;
  } else {
    cfg.synth.area = 20000.0;
    cfg.synth.min_separation = 60.0;
    cfg.synth.operator_reuse_clustering = 0.0;
  }
  return cfg;
}

}  // namespace flowrisk
