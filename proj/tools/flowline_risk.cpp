#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "flowrisk/config.hpp"
#include "flowrisk/error.hpp"
#include "flowrisk/matcher.hpp"
#include "flowrisk/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationError = 2;
constexpr int kStageFailure = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flowline risk analysis pipeline"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string pca;
  std::optional<int> pca_k;
  bool drop_id_like = false;
  std::string ladder;

  app.add_option("command", command, "synth|merge|attribute|featurize|train|evaluate|cluster|report|run-all")
      ->required()
      ->check(CLI::IsMember({"synth", "merge", "attribute", "featurize", "train", "evaluate", "cluster", "report",
                             "run-all"}));
  app.add_option("--config", config_path, "flat key = value run configuration")->required();
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--out", out_dir, "run directory");
  app.add_option("--pca", pca, "also evaluate on PCA scores")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--pca-k", pca_k, "PCA components (0 = variance threshold)");
  app.add_flag("--drop-id-like", drop_id_like, "exclude flowline_id and location_id from the features");
  app.add_option("--ladder", ladder, "comma-separated tolerance ladder in meters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationError;
  }

  flowrisk::RunConfig cfg;
  flowrisk::Stage stage{};
  try {
    stage = flowrisk::parse_stage(command);
    cfg = flowrisk::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!pca.empty()) cfg.pca = pca == "on";
    if (pca_k) flowrisk::set_config_value(cfg, "pca_k", std::to_string(*pca_k));
    if (drop_id_like) cfg.drop_id_like = true;
    if (!ladder.empty()) flowrisk::set_config_value(cfg, "ladder", ladder);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "flowline-risk: " << e.what() << '\n';
    return kValidationError;
  }

  try {
    flowrisk::run_stage(stage, cfg);
  } catch (const flowrisk::Error& e) {
    std::cerr << "flowline-risk: " << command << " failed [" << flowrisk::to_string(e.kind()) << "]: " << e.what()
              << '\n';
    return e.kind() == flowrisk::ErrorKind::ConfigError ? kValidationError : kStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "flowline-risk: " << command << " failed: " << e.what() << '\n';
    return kStageFailure;
  }
  return kOk;
}
