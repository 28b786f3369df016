#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "flowrisk/crs.hpp"
#include "flowrisk/date.hpp"
#include "flowrisk/geometry.hpp"
#include "flowrisk/matcher.hpp"
#include "flowrisk/ml.hpp"
#include "flowrisk/synth.hpp"

namespace flowrisk {

enum class InputMode { Synth, Files };

/// Everything a pipeline run depends on. Loaded from a flat `key = value`
/// file; `#` starts a comment.
struct RunConfig {
  InputMode input_mode = InputMode::Synth;
  std::filesystem::path descriptive_path;
  std::filesystem::path operational_path;
  std::filesystem::path spills_path;
  std::filesystem::path categories_path;  // empty = built-in map
  bool descriptive_geographic = false;

  SynthConfig synth;
  ToleranceLadder ladder;
  ProximityMode match_mode = ProximityMode::Endpoints;
  ProjectionParams projection;
  Date reference_date{2024, 1, 1};

  bool drop_id_like = false;
  LineCountMode line_count_mode = LineCountMode::Polylines;
  bool pca = true;  // also train and evaluate on PCA scores
  int pca_k = 0;    // 0 = smallest k reaching pca_variance
  double pca_variance = 0.95;
  double train_fraction = 0.7;

  ml::ModelSettings models;
  int kmeans_k_min = 2;
  int kmeans_k_max = 5;
  int kmeans_n_init = 10;
  int kmeans_max_iter = 300;
  double age_bin_years = 5.0;

  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = "flowline-risk-out";
  unsigned threads = 1;

  /// Throws Error(ConfigError) for a missing seed, bad ranges, or input
  /// files that do not exist.
  void validate() const;

  /// Canonical key/value echo of every setting.
  std::map<std::string, std::string> echo() const;
  /// FNV-1a of the echo; stable across runs with identical settings.
  std::uint64_t hash() const;

  std::uint64_t seed_value() const { return seed.value_or(0); }
};

/// Applies one key. Throws Error(ConfigError) on an unknown key or bad value.
/// Relative paths resolve against `base`.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                      const std::filesystem::path& base = {});

/// Parses a config file. Throws Error(FileUnreadable) or Error(ConfigError).
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view text, const std::filesystem::path& base = {});

/// Config for a synthetic run from the settings used in the matcher
/// recovery scenario: `a` = well separated, `b` = crowded same-operator lines.
RunConfig synthetic_run_config(char scenario, std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace flowrisk
