#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowrisk/crs.hpp"
#include "flowrisk/geometry.hpp"
#include "flowrisk/ingest.hpp"

namespace flowrisk {

/// Ascending match radii (meters) tried in order; a match binds at the first
/// step that yields an operator-verified candidate.
struct ToleranceLadder {
  std::vector<double> steps{0.0, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 25.0};

  double max() const { return steps.back(); }
  /// Throws Error(InvalidArgument) unless non-empty, first >= 0 and strictly ascending.
  void validate() const;
  /// Parses "0,1,2,5" style lists.
  static ToleranceLadder parse(std::string_view text);
  std::string to_string() const;
};

/// Which part of the descriptive geometry operational endpoints are measured
/// against.
enum class ProximityMode { Endpoints, Geometry };

struct MergedFlowline {
  OperationalFlowline operational;
  std::string descriptive_id;
  MultiLine geometry;
  std::string operator_name;
  double match_tolerance = 0.0;
  double d_start = 0.0;
  double d_end = 0.0;
  int risk = 0;

  const std::string& id() const { return operational.source_row_id; }
};

struct MatchAuditEntry {
  std::string record_id;
  double step_reached = 0.0;
  std::size_t n_candidates = 0;  // spatial candidates at step_reached, before operator verification
  std::optional<std::string> chosen_id;
  double d_start = 0.0;
  double d_end = 0.0;
};

struct MatchResult {
  std::vector<MergedFlowline> merged;
  std::vector<std::string> unmatched;
  std::vector<MatchAuditEntry> audit;
};

struct MatchOptions {
  ProjectionParams projection;
  ProximityMode mode = ProximityMode::Endpoints;
};

struct SpillAttribution {
  std::string spill_id;
  std::optional<std::string> flowline_id;  // MergedFlowline::id()
  double distance = 0.0;                   // NaN when unmatched
  double tolerance_used = 0.0;
};

/// Orders identifiers numerically when both parse as integers, else lexically.
bool id_less(std::string_view a, std::string_view b);

/// Two-vertex polyline between the projected endpoints. Throws
/// Error(DegenerateLine) when they coincide within 1e-6 m.
PolyLine interpolate_line(const OperationalFlowline& rec, const ProjectionParams& params = {});

MatchResult match_flowlines(const std::vector<OperationalFlowline>& operational,
                            const std::vector<DescriptiveFlowline>& descriptive, const ToleranceLadder& ladder,
                            const MatchOptions& options = {});

std::vector<SpillAttribution> match_spills(const std::vector<SpillRecord>& spills,
                                           const std::vector<MergedFlowline>& merged, const ToleranceLadder& ladder,
                                           const ProjectionParams& params = {});

/// risk = 1 exactly for flowlines referenced by an attribution. Throws
/// Error(DanglingReference) for an id not present in `merged`.
std::vector<MergedFlowline> assign_risk(std::vector<MergedFlowline> merged,
                                        const std::vector<SpillAttribution>& attributions);

void write_audit(std::ostream& out, const std::vector<MatchAuditEntry>& audit);
void write_attributions(std::ostream& out, const std::vector<SpillAttribution>& attributions);

}  // namespace flowrisk
