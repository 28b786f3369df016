#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowrisk/config.hpp"
#include "flowrisk/matcher.hpp"

namespace flowrisk {

enum class Stage { Synth, Merge, Attribute, Featurize, Train, Evaluate, Cluster, Report, RunAll };

std::string_view to_string(Stage s) noexcept;
/// Throws Error(ConfigError) for an unknown command name.
Stage parse_stage(std::string_view name);

/// Runs one stage (or the whole chain for RunAll) in cfg.out_dir. Each stage
/// checks its predecessors' artifacts, writes its own plus a manifest, and
/// appends to run.log. Errors propagate as flowrisk::Error.
void run_stage(Stage stage, const RunConfig& cfg);

/// Names of the rendered figures, relative to the run directory.
std::vector<std::string> figure_files();

/// Writes the SVG figures for `report` into dir/figures.
std::vector<std::string> render_figures(const nlohmann::json& report, const std::vector<MergedFlowline>& labeled,
                                        const std::filesystem::path& dir);

/// Structural check of report.json. Throws Error(SchemaViolation).
void validate_report(const nlohmann::json& report);

/// Copy without the wall-clock fields ("generated_at", "timings").
nlohmann::json strip_volatile(nlohmann::json report);

}  // namespace flowrisk
