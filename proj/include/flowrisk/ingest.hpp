#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flowrisk/crs.hpp"
#include "flowrisk/date.hpp"
#include "flowrisk/geometry.hpp"

namespace flowrisk {

struct DescriptiveFlowline {
  std::string source_row_id;
  std::string operator_name;
  MultiLine geometry;  // projected meters
};

struct OperationalFlowline {
  std::string source_row_id;
  std::string operator_number;
  std::string flowline_id;
  std::string location_id;
  std::string status;
  std::string flowline_action;
  std::string location_type;
  std::string fluid_type;
  std::string material;
  double diameter_inches = 0.0;
  double length_feet = 0.0;
  double max_operating_pressure = 0.0;
  Date construction_date;
  std::string operator_name;
  GeoPoint start;
  GeoPoint end;
};

struct SpillRecord {
  std::string spill_id;
  std::string operator_name;
  GeoPoint location;
  std::string root_cause_type;
  Date report_date;
};

/// One quarantined input row.
struct Diagnostic {
  std::string file;
  std::size_t row = 0;  // 1-based data row (GeoJSON: 1-based feature index)
  std::string reason;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<Diagnostic> rejects;
  std::size_t total_rows = 0;

  std::size_t accepted() const noexcept { return records.size(); }
  std::size_t rejected() const noexcept { return rejects.size(); }
};

/// Per-column ordered (pattern, canonical) lists. Patterns match the
/// trimmed, case-folded raw value exactly; the first matching entry wins.
class CategoryMap {
 public:
  static constexpr std::string_view kOther = "OTHER";

  void add(const std::string& column, std::string pattern, std::string canonical);
  bool has_column(std::string_view column) const;
  std::vector<std::string> columns() const;
  const std::vector<std::pair<std::string, std::string>>& entries(std::string_view column) const;

  /// Loads rows of (column, pattern, canonical) from a CSV with that header.
  static CategoryMap load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::vector<std::pair<std::string, std::string>>, std::less<>> columns_;
};

/// fluid_type and material maps whose canonical sets match the categories
/// reported for the operational flowline data.
const CategoryMap& default_category_map();

/// Trimmed and case-folded raw value resolved through `map`. Unmatched
/// values become "OTHER" and log a warning. Throws Error(UnknownColumn).
std::string normalize_category(std::string_view raw, std::string_view column, const CategoryMap& map);

/// Upper-cased, whitespace-collapsed, punctuation-stripped operator name used
/// for operator verification.
std::string normalize_operator_name(std::string_view raw);

std::string trim(std::string_view s);

struct DescriptiveOptions {
  bool geographic = false;  // coordinates are lon/lat and get projected on load
  ProjectionParams projection;
};

struct OperationalOptions {
  Date reference_date = Date::today();
  const CategoryMap* categories = nullptr;  // nullptr = default_category_map()
};

struct SpillOptions {
  ProjectionParams projection;
};

inline constexpr std::string_view kOperationalHeader[] = {
    "row_id",       "operator_number", "flowline_id",     "location_id",       "status",
    "flowline_action", "location_type", "fluid_type",    "material",          "diameter_in",
    "length_ft",    "max_op_pressure", "construction_date", "operator_name",   "start_lat",
    "start_lon",    "end_lat",         "end_lon"};

inline constexpr std::string_view kSpillHeader[] = {"spill_id", "operator_name", "lat",
                                                    "lon",      "root_cause_type", "report_date"};

ParseResult<DescriptiveFlowline> parse_descriptive(const std::filesystem::path& path,
                                                   const DescriptiveOptions& options = {});
ParseResult<DescriptiveFlowline> parse_descriptive_text(std::string_view text, const std::string& file_label,
                                                        const DescriptiveOptions& options = {});
ParseResult<OperationalFlowline> parse_operational(const std::filesystem::path& path,
                                                   const OperationalOptions& options = {});
ParseResult<SpillRecord> parse_spills(const std::filesystem::path& path, const SpillOptions& options = {});

void write_descriptive(std::ostream& out, const std::vector<DescriptiveFlowline>& lines);
void write_operational(std::ostream& out, const std::vector<OperationalFlowline>& records);
void write_spills(std::ostream& out, const std::vector<SpillRecord>& spills);
void write_diagnostics(std::ostream& out, const std::vector<Diagnostic>& diagnostics);

}  // namespace flowrisk
