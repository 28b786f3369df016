#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowrisk/crs.hpp"
#include "flowrisk/date.hpp"
#include "flowrisk/ingest.hpp"

namespace flowrisk {

/// Synthetic network parameters. Lengths are meters in the projected CRS.
struct SynthConfig {
  std::size_t n_lines = 1000;
  double area = 20000.0;  // side of the square extent
  double origin_x = 480000.0;
  double origin_y = 4400000.0;
  double min_separation = 60.0;  // between endpoints of different lines
  double endpoint_jitter_sigma = 5.0;
  double spill_rate = 0.01;  // fraction of operational lines that spill
  double spill_lateral_sigma = 8.0;
  std::size_t n_operators = 50;
  double operator_reuse_clustering = 0.0;  // chance a line is an offset copy of a neighbour
  double operational_fraction = 1.0;
  std::size_t n_orphan_spills = 0;  // spills >= kOrphanClearance from every line
  double segment_length = 100.0;
  Date reference_date{2024, 1, 1};
  ProjectionParams projection;
  std::uint64_t seed = 0;

  static constexpr double kOrphanClearance = 30.0;
  static constexpr std::size_t kMaxAttempts = 10000;

  /// Throws Error(InvalidArgument) on rates outside [0,1] or negative lengths.
  void validate() const;
};

/// True target of every generated operational record and spill.
struct GroundTruth {
  std::vector<std::pair<std::string, std::string>> operational;         // op row_id -> descriptive row_id
  std::vector<std::pair<std::string, std::optional<std::string>>> spills;  // spill_id -> op row_id

  void write(std::ostream& out) const;
  static GroundTruth read(const std::filesystem::path& path);
};

struct SynthOutput {
  std::vector<DescriptiveFlowline> descriptive;
  std::vector<OperationalFlowline> operational;
  std::vector<SpillRecord> spills;
  GroundTruth truth;
};

/// Deterministic in cfg. Throws Error(InfeasiblePacking) when a line or
/// orphan spill cannot be placed within kMaxAttempts draws.
SynthOutput generate(const SynthConfig& cfg);

struct SynthPaths {
  std::filesystem::path descriptive;
  std::filesystem::path operational;
  std::filesystem::path spills;
  std::filesystem::path truth;
};

SynthPaths synth_paths(const std::filesystem::path& dir);

/// Writes descriptive.geojson, operational.csv, spills.csv and ground_truth.csv.
SynthPaths write_synth(const std::filesystem::path& dir, const SynthOutput& output);

}  // namespace flowrisk
