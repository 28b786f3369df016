#include "flowrisk/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "flowrisk/artifacts.hpp"
#include "flowrisk/csv.hpp"
#include "flowrisk/error.hpp"
#include "flowrisk/eval.hpp"
#include "flowrisk/features.hpp"
#include "flowrisk/ingest.hpp"
#include "flowrisk/log.hpp"
#include "flowrisk/ml.hpp"
#include "flowrisk/numerics.hpp"
#include "flowrisk/rng.hpp"
#include "flowrisk/svg.hpp"
#include "flowrisk/synth.hpp"

namespace flowrisk {

using nlohmann::json;

namespace {

// Seed streams for the stochastic stages.
enum SeedStream : std::uint64_t { kSplitStream = 1, kSvmStream = 2, kForestStream = 3, kKMeansStream = 4 };

constexpr const char* kSynthDescriptive = "input/descriptive.geojson";
constexpr const char* kSynthOperational = "input/operational.csv";
constexpr const char* kSynthSpills = "input/spills.csv";
constexpr const char* kSynthTruth = "input/ground_truth.csv";

struct Context {
  const RunConfig& cfg;
  RunDirectory dir;
  std::string config_hash;
};

std::string csv_text(const std::function<void(std::ostream&)>& write) {
  std::ostringstream out;
  write(out);
  return out.str();
}

// Input file names for the ingest stages: run-relative in synth mode,
// absolute in files mode.
std::string descriptive_input(const Context& ctx) {
  if (ctx.cfg.input_mode == InputMode::Synth) {
    ctx.dir.require("synth", kSynthDescriptive);
    return kSynthDescriptive;
  }
  return std::filesystem::absolute(ctx.cfg.descriptive_path).string();
}

std::string operational_input(const Context& ctx) {
  if (ctx.cfg.input_mode == InputMode::Synth) {
    ctx.dir.require("synth", kSynthOperational);
    return kSynthOperational;
  }
  return std::filesystem::absolute(ctx.cfg.operational_path).string();
}

std::string spills_input(const Context& ctx) {
  if (ctx.cfg.input_mode == InputMode::Synth) {
    ctx.dir.require("synth", kSynthSpills);
    return kSynthSpills;
  }
  return std::filesystem::absolute(ctx.cfg.spills_path).string();
}

std::optional<GroundTruth> ground_truth(const Context& ctx) {
  if (ctx.cfg.input_mode != InputMode::Synth) return std::nullopt;
  return GroundTruth::read(ctx.dir.require("synth", kSynthTruth));
}

void stage_synth(const Context& ctx) {
  if (ctx.cfg.input_mode != InputMode::Synth) {
    throw Error(ErrorKind::ConfigError, "synth requires input_mode = synth");
  }
  SynthConfig sc = ctx.cfg.synth;
  sc.seed = ctx.cfg.seed_value();
  sc.reference_date = ctx.cfg.reference_date;
  sc.projection = ctx.cfg.projection;
  write_synth(ctx.dir.path("input"), generate(sc));
  ctx.dir.commit("synth", ctx.config_hash, {}, {kSynthDescriptive, kSynthOperational, kSynthSpills, kSynthTruth});
}

void stage_merge(const Context& ctx) {
  const auto desc_name = descriptive_input(ctx);
  const auto op_name = operational_input(ctx);

  DescriptiveOptions dopt{ctx.cfg.descriptive_geographic, ctx.cfg.projection};
  auto desc = parse_descriptive(ctx.dir.path(desc_name), dopt);

  std::optional<CategoryMap> categories;
  if (!ctx.cfg.categories_path.empty()) categories = CategoryMap::load(ctx.cfg.categories_path);
  OperationalOptions oopt{ctx.cfg.reference_date, categories ? &*categories : nullptr};
  auto ops = parse_operational(ctx.dir.path(op_name), oopt);

  const auto result = match_flowlines(ops.records, desc.records, ctx.cfg.ladder, {ctx.cfg.projection, ctx.cfg.match_mode});

  std::vector<Diagnostic> diagnostics = desc.rejects;
  diagnostics.insert(diagnostics.end(), ops.rejects.begin(), ops.rejects.end());

  json by_step = json::array();
  for (double step : ctx.cfg.ladder.steps) {
    const auto n = std::count_if(result.merged.begin(), result.merged.end(),
                                 [&](const MergedFlowline& m) { return m.match_tolerance == step; });
    by_step.push_back({{"step", step}, {"matched", n}});
  }
  json stats = {{"descriptive_rows", desc.total_rows},
                {"descriptive_accepted", desc.accepted()},
                {"operational_rows", ops.total_rows},
                {"operational_accepted", ops.accepted()},
                {"rejected", diagnostics.size()},
                {"merged", result.merged.size()},
                {"unmatched", result.unmatched.size()},
                {"by_step", by_step},
                {"unmatched_ids", result.unmatched}};
  if (auto truth = ground_truth(ctx)) {
    std::map<std::string, std::string> expected(truth->operational.begin(), truth->operational.end());
    std::size_t correct = 0;
    for (const auto& a : result.audit) {
      auto it = expected.find(a.record_id);
      if (it != expected.end() && a.chosen_id && *a.chosen_id == it->second) ++correct;
    }
    stats["truth"] = {{"records", expected.size()}, {"correct", correct}};
  }

  write_json(ctx.dir.path("merged.json"), merged_to_json(result.merged));
  write_text(ctx.dir.path("audit.csv"), csv_text([&](std::ostream& o) { write_audit(o, result.audit); }));
  write_text(ctx.dir.path("diagnostics.csv"), csv_text([&](std::ostream& o) { write_diagnostics(o, diagnostics); }));
  write_json(ctx.dir.path("match_stats.json"), stats);
  ctx.dir.commit("merge", ctx.config_hash, {desc_name, op_name},
                 {"merged.json", "audit.csv", "diagnostics.csv", "match_stats.json"});
}

void stage_attribute(const Context& ctx) {
  const auto merged = merged_from_json_array(read_json(ctx.dir.require("merge", "merged.json")));
  const auto spills_name = spills_input(ctx);
  auto spills = parse_spills(ctx.dir.path(spills_name), {ctx.cfg.projection});
  const auto attributions = match_spills(spills.records, merged, ctx.cfg.ladder, ctx.cfg.projection);
  const auto labeled = assign_risk(merged, attributions);

  const auto attributed = std::count_if(attributions.begin(), attributions.end(),
                                        [](const SpillAttribution& a) { return a.flowline_id.has_value(); });
  const auto positive =
      std::count_if(labeled.begin(), labeled.end(), [](const MergedFlowline& m) { return m.risk == 1; });
  json stats = {{"spill_rows", spills.total_rows},
                {"spills_accepted", spills.accepted()},
                {"attributed", attributed},
                {"unattributed", static_cast<long>(attributions.size()) - attributed},
                {"flowlines", labeled.size()},
                {"positive", positive},
                {"positive_rate", labeled.empty() ? 0.0 : static_cast<double>(positive) / labeled.size()}};
  if (auto truth = ground_truth(ctx)) {
    std::map<std::string, std::optional<std::string>> expected(truth->spills.begin(), truth->spills.end());
    std::size_t correct = 0;
    for (const auto& a : attributions) {
      auto it = expected.find(a.spill_id);
      if (it != expected.end() && it->second == a.flowline_id) ++correct;
    }
    stats["truth"] = {{"spills", expected.size()}, {"correct", correct}};
  }

  write_text(ctx.dir.path("attributions.csv"),
             csv_text([&](std::ostream& o) { write_attributions(o, attributions); }));
  write_text(ctx.dir.path("spill_diagnostics.csv"),
             csv_text([&](std::ostream& o) { write_diagnostics(o, spills.rejects); }));
  write_json(ctx.dir.path("labeled.json"), merged_to_json(labeled));
  write_json(ctx.dir.path("attribute_stats.json"), stats);
  ctx.dir.commit("attribute", ctx.config_hash, {"merged.json", spills_name},
                 {"attributions.csv", "spill_diagnostics.csv", "labeled.json", "attribute_stats.json"});
}

void stage_featurize(const Context& ctx) {
  const auto labeled = merged_from_json_array(read_json(ctx.dir.require("attribute", "labeled.json")));
  FeatureConfig fc;
  fc.drop_id_like = ctx.cfg.drop_id_like;
  fc.reference_date = ctx.cfg.reference_date;
  fc.line_count_mode = ctx.cfg.line_count_mode;
  const Dataset ds = assemble(labeled, fc);
  write_dataset(ctx.dir.path("dataset.csv"), ds, ctx.cfg.seed_value());
  ctx.dir.commit("featurize", ctx.config_hash, {"labeled.json"}, {"dataset.csv", "dataset.csv.json"});
}

Dataset load_dataset(const Context& ctx) {
  ctx.dir.require("featurize", "dataset.csv.json");
  std::uint64_t seed = 0;
  Dataset ds = read_dataset(ctx.dir.require("featurize", "dataset.csv"), &seed);
  if (seed != ctx.cfg.seed_value()) {
    throw Error(ErrorKind::SchemaHashMismatch, "dataset was built with seed " + std::to_string(seed));
  }
  return ds;
}

std::vector<std::size_t> positions_of(const Dataset& ds, const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.row_ids.size(); ++i) index.emplace(ds.row_ids[i], i);
  std::vector<std::size_t> out;
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorKind::SchemaHashMismatch, "split references unknown row " + id);
    out.push_back(it->second);
  }
  return out;
}

json scaler_to_json(const Standardizer& s) {
  return {{"means", ml::vector_to_json(s.means)}, {"sds", ml::vector_to_json(s.sds)}, {"scaled", s.scaled}};
}

Standardizer scaler_from_json(const json& j) {
  Standardizer s;
  s.means = ml::vector_from_json(j.at("means"));
  s.sds = ml::vector_from_json(j.at("sds"));
  s.scaled = j.at("scaled").get<std::vector<bool>>();
  return s;
}

json pca_to_json(const PCAModel<double>& m) {
  return {{"k", m.k()},
          {"means", ml::vector_to_json(m.means)},
          {"components", ml::matrix_to_json(m.components)},
          {"explained_variance", ml::vector_to_json(m.explained_variance)},
          {"total_variance", m.total_variance}};
}

PCAModel<double> pca_from_json(const json& j) {
  PCAModel<double> m;
  m.means = ml::vector_from_json(j.at("means"));
  m.components = ml::matrix_from_json(j.at("components"));
  m.explained_variance = ml::vector_from_json(j.at("explained_variance"));
  m.total_variance = j.at("total_variance").get<double>();
  return m;
}

std::string model_file(ml::ModelKind kind, bool pca) {
  return "models/" + std::string(ml::to_string(kind)) + (pca ? "_pca" : "") + ".json";
}

ml::ModelSettings model_settings(const RunConfig& cfg) {
  ml::ModelSettings s = cfg.models;
  s.svm.seed = derive_seed(cfg.seed_value(), kSvmStream);
  s.rf.seed = derive_seed(cfg.seed_value(), kForestStream);
  s.rf.threads = cfg.threads;
  return s;
}

void stage_train(const Context& ctx) {
  const Dataset ds = load_dataset(ctx);
  const std::uint64_t hash = schema_hash(ds.columns);
  const SplitPair split = stratified_split(ds, ctx.cfg.train_fraction, derive_seed(ctx.cfg.seed_value(), kSplitStream));
  const StandardizedSplit std_split = standardize(split.train, split.test);
  const DenseMatrix& X = std_split.train.X;

  std::vector<std::string> outputs{"split.json", "scaler.json", "train_stats.json"};
  write_json(ctx.dir.path("split.json"), {{"train", split.train.row_ids}, {"test", split.test.row_ids}});
  write_json(ctx.dir.path("scaler.json"), scaler_to_json(std_split.scaler));

  std::optional<PCAModel<double>> pca;
  if (ctx.cfg.pca) {
    pca = pca_fit(X, ctx.cfg.pca_k, ctx.cfg.pca_variance);
    write_json(ctx.dir.path("pca.json"), pca_to_json(*pca));
    outputs.push_back("pca.json");
  }

  const auto settings = model_settings(ctx.cfg);
  json stats = {{"train_rows", X.rows()},
                {"test_rows", std_split.test.X.rows()},
                {"features", X.cols()},
                {"pca_k", pca ? pca->k() : 0},
                {"gbdt_loss_trace", json::object()}};
  for (int variant = 0; variant < (pca ? 2 : 1); ++variant) {
    const bool use_pca = variant == 1;
    const DenseMatrix Xv = use_pca ? pca_transform(*pca, X) : X;
    for (auto kind : ml::kReportedModels) {
      auto model = ml::make_classifier(kind, settings);
      model->fit(Xv, std_split.train.y);
      json doc = model->to_json();
      doc["seed"] = ctx.cfg.seed_value();
      doc["schema_hash"] = hex64(hash);
      const auto name = model_file(kind, use_pca);
      write_json(ctx.dir.path(name), doc);
      outputs.push_back(name);
      if (kind == ml::ModelKind::GBDT) {
        stats["gbdt_loss_trace"][use_pca ? "pca" : "raw"] =
            static_cast<const ml::GradientBoosting&>(*model).loss_trace();
      }
    }
  }
  write_json(ctx.dir.path("train_stats.json"), stats);
  ctx.dir.commit("train", ctx.config_hash, {"dataset.csv", "dataset.csv.json"}, outputs);
}

void stage_evaluate(const Context& ctx) {
  const Dataset ds = load_dataset(ctx);
  const std::uint64_t hash = schema_hash(ds.columns);
  const json split = read_json(ctx.dir.require("train", "split.json"));
  const Dataset test = ds.subset(positions_of(ds, split.at("test").get<std::vector<std::string>>()));
  const Standardizer scaler = scaler_from_json(read_json(ctx.dir.require("train", "scaler.json")));
  const DenseMatrix X = scaler.transform(test.X);

  std::optional<PCAModel<double>> pca;
  if (ctx.cfg.pca) pca = pca_from_json(read_json(ctx.dir.require("train", "pca.json")));

  std::vector<std::string> inputs{"dataset.csv", "split.json", "scaler.json"};
  if (pca) inputs.push_back("pca.json");
  json rows = json::array();
  json confusions = json::array();
  for (int variant = 0; variant < (pca ? 2 : 1); ++variant) {
    const bool use_pca = variant == 1;
    const DenseMatrix Xv = use_pca ? pca_transform(*pca, X) : X;
    std::vector<std::unique_ptr<ml::Classifier>> models;
    for (auto kind : ml::kReportedModels) {
      const auto name = model_file(kind, use_pca);
      const json doc = read_json(ctx.dir.require("train", name));
      if (doc.value("schema_hash", std::string()) != hex64(hash)) {
        throw Error(ErrorKind::SchemaHashMismatch, name + " was trained on a different feature schema");
      }
      models.push_back(ml::load_classifier(doc));
      inputs.push_back(name);
    }
    std::vector<const ml::Classifier*> view;
    for (const auto& m : models) {
      view.push_back(m.get());
      const auto cm = confusion(test.y, m->predict(Xv));
      confusions.push_back({{"model", std::string(ml::to_string(m->kind()))},
                            {"pca", use_pca},
                            {"tp", cm.tp},
                            {"fp", cm.fp},
                            {"fn", cm.fn},
                            {"tn", cm.tn}});
    }
    for (const auto& row : metric_table(view, Xv, test.y, use_pca)) rows.push_back(row.to_json());
  }
  write_json(ctx.dir.path("metrics.json"), {{"rows", rows}, {"confusion", confusions}});
  ctx.dir.commit("evaluate", ctx.config_hash, inputs, {"metrics.json"});
}

void stage_cluster(const Context& ctx) {
  const Dataset ds = load_dataset(ctx);
  const DenseMatrix X = Standardizer::fit(ds.X).transform(ds.X);
  const auto sweep = silhouette_sweep(X, ctx.cfg.kmeans_k_min, ctx.cfg.kmeans_k_max,
                                      derive_seed(ctx.cfg.seed_value(), kKMeansStream), ctx.cfg.kmeans_n_init,
                                      ctx.cfg.kmeans_max_iter);
  const auto pca = pca_fit(X, std::min<Eigen::Index>(2, X.cols()));
  DenseMatrix scores = pca_transform(pca, X);
  const std::size_t best = static_cast<std::size_t>(sweep.best_k - ctx.cfg.kmeans_k_min);

  json traces = json::array(), inertia = json::array();
  for (const auto& fit : sweep.fits) {
    traces.push_back(fit.inertia_trace);
    inertia.push_back(fit.inertia);
  }
  json pc1 = json::array(), pc2 = json::array();
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    pc1.push_back(scores(i, 0));
    pc2.push_back(scores.cols() > 1 ? scores(i, 1) : 0.0);
  }
  json doc = {{"ks", sweep.ks},
              {"scores", sweep.scores},
              {"best_k", sweep.best_k},
              {"inertia", inertia},
              {"inertia_traces", traces},
              {"scatter",
               {{"row_ids", ds.row_ids},
                {"pc1", pc1},
                {"pc2", pc2},
                {"cluster", sweep.fits[best].assignments},
                {"label", ds.y}}}};
  write_json(ctx.dir.path("cluster.json"), doc);
  ctx.dir.commit("cluster", ctx.config_hash, {"dataset.csv"}, {"cluster.json"});
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

struct FigureSpec {
  const char* file;
  const char* payload;
  const char* eda_table;  // nullptr for non-bar figures
  const char* title;
};

constexpr FigureSpec kFigures[] = {
    {"figures/map.svg", "map", nullptr, "Spatial distribution of flowline risk"},
    {"figures/risk_by_age.svg", "eda", "line_age", "Risk vs. line age (years)"},
    {"figures/risk_by_diameter.svg", "eda", "diameter", "Risk vs. diameter (in)"},
    {"figures/risk_by_fluid.svg", "eda", "fluid_type", "Risk vs. type of fluid"},
    {"figures/risk_by_material.svg", "eda", "material", "Risk vs. pipe material"},
    {"figures/risk_by_operator.svg", "eda", "operator_number", "Risk vs. operator number"},
    {"figures/silhouette.svg", "silhouette", nullptr, "Silhouette score by cluster number"},
    {"figures/pca_kmeans.svg", "pca_scatter", nullptr, "PCA of dataset with k-means clustering"},
};

FrequencyTable table_from_json(const json& j) {
  FrequencyTable t{j.at("name").get<std::string>(), {}};
  for (const auto& r : j.at("rows")) {
    t.rows.push_back({r.at("category").get<std::string>(), r.at("low").get<std::size_t>(), r.at("high").get<std::size_t>()});
  }
  return t;
}

void write_tables(const Context& ctx, const json& report, std::vector<std::string>& outputs) {
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(ctx.dir.path(name), text);
    outputs.push_back(name);
  };
  emit("tables/metrics.csv", csv_text([&](std::ostream& o) {
         csv::write_row(o, {"model", "pca", "averaging", "accuracy", "precision", "recall", "f1", "undefined"});
         for (const auto& r : report.at("metric_rows")) {
           csv::write_row(o, {r.at("model").get<std::string>(), r.at("pca").get<bool>() ? "with" : "without",
                              r.at("averaging").get<std::string>(), csv::format_double(r.at("accuracy").get<double>()),
                              csv::format_double(r.at("precision").get<double>()),
                              csv::format_double(r.at("recall").get<double>()),
                              csv::format_double(r.at("f1").get<double>()), r.at("undefined").get<bool>() ? "1" : "0"});
         }
       }));
  for (const auto& t : report.at("eda")) {
    const auto table = table_from_json(t);
    emit("tables/eda_" + table.name + ".csv", csv_text([&](std::ostream& o) {
           csv::write_row(o, {"category", "low", "high", "low_proportion", "high_proportion"});
           for (std::size_t i = 0; i < table.rows.size(); ++i) {
             csv::write_row(o, {table.rows[i].category, std::to_string(table.rows[i].low),
                                std::to_string(table.rows[i].high), csv::format_double(table.proportion(i, 0)),
                                csv::format_double(table.proportion(i, 1))});
           }
         }));
  }
  emit("tables/silhouette.csv", csv_text([&](std::ostream& o) {
         csv::write_row(o, {"k", "silhouette"});
         const auto& s = report.at("silhouette");
         for (std::size_t i = 0; i < s.at("ks").size(); ++i) {
           csv::write_row(o, {std::to_string(s.at("ks")[i].get<int>()), csv::format_double(s.at("scores")[i].get<double>())});
         }
       }));
  emit("tables/match_steps.csv", csv_text([&](std::ostream& o) {
         csv::write_row(o, {"tolerance_m", "matched"});
         for (const auto& s : report.at("match").at("by_step")) {
           csv::write_row(o, {csv::format_double(s.at("step").get<double>()), std::to_string(s.at("matched").get<long>())});
         }
       }));
}

void stage_report(const Context& ctx) {
  const json match = read_json(ctx.dir.require("merge", "match_stats.json"));
  const json attribution = read_json(ctx.dir.require("attribute", "attribute_stats.json"));
  const auto labeled = merged_from_json_array(read_json(ctx.dir.require("attribute", "labeled.json")));
  const json metrics = read_json(ctx.dir.require("evaluate", "metrics.json"));
  const json cluster = read_json(ctx.dir.require("cluster", "cluster.json"));

  json eda = json::array();
  for (const auto& t : eda_summaries(labeled, {ctx.cfg.reference_date, ctx.cfg.age_bin_years})) eda.push_back(t.to_json());

  json map_lines = json::array();
  for (const auto& m : labeled) map_lines.push_back({{"id", m.id()}, {"risk", m.risk}});

  json timings = json::object();
  if (std::filesystem::exists(ctx.dir.path("timings.json"))) timings = read_json(ctx.dir.path("timings.json"));

  json figures = json::array();
  for (const auto& f : kFigures) {
    json entry = {{"file", f.file}, {"payload", f.payload}, {"title", f.title}};
    if (f.eda_table) entry["table"] = f.eda_table;
    figures.push_back(entry);
  }

  json report = {{"schema_version", 1},
                 {"run_id", ctx.config_hash},
                 {"generated_at", iso_now()},
                 {"timings", timings},
                 {"config", ctx.cfg.echo()},
                 {"match", match},
                 {"attribution", attribution},
                 {"eda", eda},
                 {"metric_rows", metrics.at("rows")},
                 {"confusion", metrics.at("confusion")},
                 {"silhouette",
                  {{"ks", cluster.at("ks")}, {"scores", cluster.at("scores")}, {"best_k", cluster.at("best_k")}}},
                 {"pca_scatter", cluster.at("scatter")},
                 {"map", {{"flowlines", map_lines}}},
                 {"figures", figures}};
  validate_report(report);

  std::vector<std::string> outputs = render_figures(report, labeled, ctx.dir.root());
  write_tables(ctx, report, outputs);
  write_json(ctx.dir.path("report.json"), report);
  outputs.push_back("report.json");
  ctx.dir.commit("report", ctx.config_hash,
                 {"match_stats.json", "attribute_stats.json", "labeled.json", "metrics.json", "cluster.json"}, outputs);
}

void record_timing(const Context& ctx, Stage stage, double seconds) {
  json timings = json::object();
  const auto path = ctx.dir.path("timings.json");
  if (std::filesystem::exists(path)) timings = read_json(path);
  timings[std::string(to_string(stage))] = seconds;
  write_json(path, timings);
}

void run_single(const Context& ctx, Stage stage) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (stage) {
      case Stage::Synth: stage_synth(ctx); break;
      case Stage::Merge: stage_merge(ctx); break;
      case Stage::Attribute: stage_attribute(ctx); break;
      case Stage::Featurize: stage_featurize(ctx); break;
      case Stage::Train: stage_train(ctx); break;
      case Stage::Evaluate: stage_evaluate(ctx); break;
      case Stage::Cluster: stage_cluster(ctx); break;
      case Stage::Report: stage_report(ctx); break;
      case Stage::RunAll: break;
    }
  } catch (const Error& e) {
    ctx.dir.log(std::string("stage=") + std::string(to_string(stage)) + " status=failed error=" +
                std::string(to_string(e.kind())) + " message=\"" + e.what() + "\"");
    throw;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  record_timing(ctx, stage, seconds);
  ctx.dir.log(std::string("stage=") + std::string(to_string(stage)) + " status=ok seconds=" + std::to_string(seconds));
}

}  // namespace

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Synth: return "synth";
    case Stage::Merge: return "merge";
    case Stage::Attribute: return "attribute";
    case Stage::Featurize: return "featurize";
    case Stage::Train: return "train";
    case Stage::Evaluate: return "evaluate";
    case Stage::Cluster: return "cluster";
    case Stage::Report: return "report";
    case Stage::RunAll: return "run-all";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (auto s : {Stage::Synth, Stage::Merge, Stage::Attribute, Stage::Featurize, Stage::Train, Stage::Evaluate,
                 Stage::Cluster, Stage::Report, Stage::RunAll}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::ConfigError, "unknown command '" + std::string(name) + "'");
}

void run_stage(Stage stage, const RunConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Context ctx{cfg, RunDirectory(cfg.out_dir), hex64(cfg.hash())};
  if (stage != Stage::RunAll) {
    run_single(ctx, stage);
    return;
  }
  if (cfg.input_mode == InputMode::Synth) run_single(ctx, Stage::Synth);
  for (auto s : {Stage::Merge, Stage::Attribute, Stage::Featurize, Stage::Train, Stage::Evaluate, Stage::Cluster,
                 Stage::Report}) {
    run_single(ctx, s);
  }
}

std::vector<std::string> figure_files() {
  std::vector<std::string> out;
  for (const auto& f : kFigures) out.emplace_back(f.file);
  return out;
}

std::vector<std::string> render_figures(const json& report, const std::vector<MergedFlowline>& labeled,
                                        const std::filesystem::path& dir) {
  std::map<std::string, FrequencyTable> tables;
  for (const auto& t : report.at("eda")) {
    auto table = table_from_json(t);
    tables.emplace(table.name, std::move(table));
  }
  std::vector<std::string> written;
  for (const auto& f : kFigures) {
    std::string svg_text;
    const std::string payload = f.payload;
    if (payload == "map") {
      svg_text = svg::map_figure(labeled, f.title);
    } else if (payload == "eda") {
      auto it = tables.find(f.eda_table);
      if (it == tables.end()) throw Error(ErrorKind::SchemaViolation, std::string("report lacks table ") + f.eda_table);
      svg_text = svg::bar_chart(it->second, f.title);
    } else if (payload == "silhouette") {
      const auto& s = report.at("silhouette");
      std::vector<double> ks;
      for (const auto& k : s.at("ks")) ks.push_back(k.get<double>());
      svg_text = svg::line_chart(ks, s.at("scores").get<std::vector<double>>(), f.title, "Number of clusters",
                                 "Silhouette score");
    } else {
      const auto& s = report.at("pca_scatter");
      const auto pc1 = s.at("pc1").get<std::vector<double>>();
      const auto pc2 = s.at("pc2").get<std::vector<double>>();
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < pc1.size(); ++i) pts.emplace_back(pc1[i], pc2[i]);
      svg_text = svg::scatter_panels(pts, s.at("cluster").get<std::vector<int>>(), s.at("label").get<std::vector<int>>(),
                                     f.title);
    }
    write_text(dir / f.file, svg_text);
    written.emplace_back(f.file);
  }
  return written;
}

void validate_report(const json& report) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::SchemaViolation, "report: " + msg); };
  auto need = [&](const json& obj, const char* key, json::value_t type) -> const json& {
    if (!obj.is_object() || !obj.contains(key)) fail(std::string("missing '") + key + "'");
    const json& v = obj.at(key);
    const bool ok = v.type() == type || (type == json::value_t::number_float && v.is_number()) ||
                    (type == json::value_t::number_unsigned && v.is_number_integer());
    if (!ok) fail(std::string("'") + key + "' has the wrong type");
    return v;
  };
  using V = json::value_t;
  need(report, "schema_version", V::number_unsigned);
  need(report, "run_id", V::string);
  need(report, "config", V::object);
  need(report, "match", V::object);
  need(report, "attribution", V::object);
  need(report, "map", V::object);

  const std::set<std::string> averagings{"positive-class", "macro", "weighted"};
  for (const auto& row : need(report, "metric_rows", V::array)) {
    need(row, "model", V::string);
    need(row, "pca", V::boolean);
    need(row, "undefined", V::boolean);
    if (!averagings.count(need(row, "averaging", V::string).get<std::string>())) fail("unknown averaging");
    for (const char* m : {"accuracy", "precision", "recall", "f1"}) {
      const double v = need(row, m, V::number_float).get<double>();
      if (!(v >= 0.0 && v <= 1.0)) fail(std::string(m) + " outside [0,1]");
    }
  }

  for (const auto& t : need(report, "eda", V::array)) {
    need(t, "name", V::string);
    double sum = 0.0;
    for (const auto& r : need(t, "rows", V::array)) {
      need(r, "category", V::string);
      sum += need(r, "low_proportion", V::number_float).get<double>() + need(r, "high_proportion", V::number_float).get<double>();
    }
    if (!need(t, "rows", V::array).empty() && std::abs(sum - 1.0) > 1e-9) fail("eda proportions do not sum to 1");
  }

  const auto& sil = need(report, "silhouette", V::object);
  const auto& ks = need(sil, "ks", V::array);
  const auto& scores = need(sil, "scores", V::array);
  if (ks.size() != scores.size() || ks.empty()) fail("silhouette ks/scores mismatch");
  const int best = need(sil, "best_k", V::number_unsigned).get<int>();
  if (std::find(ks.begin(), ks.end(), json(best)) == ks.end()) fail("best_k not among swept k");

  const auto& scatter = need(report, "pca_scatter", V::object);
  const std::size_t n = need(scatter, "pc1", V::array).size();
  for (const char* key : {"pc2", "cluster", "label", "row_ids"}) {
    if (need(scatter, key, V::array).size() != n) fail(std::string("pca_scatter '") + key + "' length mismatch");
  }
  need(need(report, "map", V::object), "flowlines", V::array);

  std::set<std::string> tables;
  for (const auto& t : report.at("eda")) tables.insert(t.at("name").get<std::string>());
  for (const auto& f : need(report, "figures", V::array)) {
    const std::string file = need(f, "file", V::string).get<std::string>();
    if (file.rfind("figures/", 0) != 0 || file.size() < 12 || file.substr(file.size() - 4) != ".svg") {
      fail("figure file '" + file + "' is not figures/*.svg");
    }
    const std::string payload = need(f, "payload", V::string).get<std::string>();
    if (!report.contains(payload)) fail("figure payload '" + payload + "' is absent");
    if (f.contains("table") && !tables.count(f.at("table").get<std::string>())) fail("figure table is absent");
  }
}

json strip_volatile(json report) {
  report.erase("generated_at");
  report.erase("timings");
  return report;
}

}  // namespace flowrisk
