#include "flowrisk/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>

#include <json.hpp>

#include "flowrisk/csv.hpp"
#include "flowrisk/error.hpp"
#include "flowrisk/log.hpp"

namespace flowrisk {
namespace {

using nlohmann::json;

std::string fold(std::string_view s) {
  std::string out = trim(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_number(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = t.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Shared header check for the delimited inputs: every declared column must
// exist; order is free.
std::vector<std::size_t> resolve_columns(const csv::Table& table, std::span<const std::string_view> names) {
  std::vector<std::size_t> positions;
  for (auto name : names) {
    auto pos = table.column(name);
    if (!pos) throw Error(ErrorKind::MissingColumn, std::string(name));
    positions.push_back(*pos);
  }
  return positions;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileUnreadable, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string json_id(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return csv::format_double(v.get<double>());
  return {};
}

}  // namespace

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

void CategoryMap::add(const std::string& column, std::string pattern, std::string canonical) {
  columns_[column].emplace_back(fold(pattern), std::move(canonical));
}

bool CategoryMap::has_column(std::string_view column) const { return columns_.find(column) != columns_.end(); }

std::vector<std::string> CategoryMap::columns() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : columns_) out.push_back(name);
  return out;
}

const std::vector<std::pair<std::string, std::string>>& CategoryMap::entries(std::string_view column) const {
  auto it = columns_.find(column);
  if (it == columns_.end()) throw Error(ErrorKind::UnknownColumn, std::string(column));
  return it->second;
}

CategoryMap CategoryMap::load(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  static constexpr std::string_view kNames[] = {"column", "pattern", "canonical"};
  const auto cols = resolve_columns(table, kNames);
  CategoryMap map;
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw Error(ErrorKind::SchemaViolation, path.string() + " line " + std::to_string(row.line));
    }
    map.add(trim(row.fields[cols[0]]), row.fields[cols[1]], trim(row.fields[cols[2]]));
  }
  return map;
}

const CategoryMap& default_category_map() {
  static const CategoryMap map = [] {
    CategoryMap m;
    for (auto p : {"crude oil", "crude", "oil", "crud oil", "crude-oil", "crudeoil"}) m.add("fluid_type", p, "CRUDE_OIL");
    for (auto p : {"multiphase", "multi-phase", "multi phase", "multiphse"}) m.add("fluid_type", p, "MULTIPHASE");
    for (auto p : {"natural gas", "gas", "nat gas", "natural-gas", "naturalgas", "dry gas"}) m.add("fluid_type", p, "NATURAL_GAS");
    for (auto p : {"produced water", "water", "prod water", "produced-water", "produced h2o"}) m.add("fluid_type", p, "PRODUCED_WATER");
    m.add("fluid_type", "other", "OTHER");
    for (auto p : {"carbon steel", "carbon-steel", "cs", "carbonsteel"}) m.add("material", p, "CARBON_STEEL");
    for (auto p : {"fiberglass", "fibreglass", "fiber glass", "frp"}) m.add("material", p, "FIBERGLASS");
    for (auto p : {"hdpe", "poly", "polyethylene", "high density polyethylene"}) m.add("material", p, "HDPE");
    for (auto p : {"pvc", "polyvinyl chloride"}) m.add("material", p, "PVC");
    for (auto p : {"steel", "stl"}) m.add("material", p, "STEEL");
    m.add("material", "other", "OTHER");
    return m;
  }();
  return map;
}

std::string normalize_category(std::string_view raw, std::string_view column, const CategoryMap& map) {
  const auto& entries = map.entries(column);
  const std::string key = fold(raw);
  // Canonical values are fixpoints so normalization stays idempotent.
  for (const auto& [pattern, canonical] : entries) {
    if (key == fold(canonical)) return canonical;
  }
  for (const auto& [pattern, canonical] : entries) {
    if (key == pattern) return canonical;
  }
  if (key == fold(CategoryMap::kOther)) return std::string(CategoryMap::kOther);
  log::warn("unmapped " + std::string(column) + " value '" + trim(raw) + "' mapped to OTHER");
  return std::string(CategoryMap::kOther);
}

std::string normalize_operator_name(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (c == '.' || c == ',') continue;
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::toupper(c)));
  }
  return out;
}

ParseResult<DescriptiveFlowline> parse_descriptive_text(std::string_view text, const std::string& file_label,
                                                        const DescriptiveOptions& options) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, file_label + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw Error(ErrorKind::SchemaViolation, file_label + ": not a GeoJSON FeatureCollection");
  }

  ParseResult<DescriptiveFlowline> result;
  const auto& features = doc["features"];
  result.total_rows = features.size();
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::size_t row = i + 1;
    auto reject = [&](std::string reason) { result.rejects.push_back({file_label, row, std::move(reason)}); };
    const auto& f = features[i];
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object()) {
      reject("missing geometry");
      continue;
    }
    const auto& geom = f["geometry"];
    const std::string type = geom.value("type", "");
    if (!geom.contains("coordinates") || !geom["coordinates"].is_array()) {
      reject("missing coordinates");
      continue;
    }
    json parts;
    if (type == "MultiLineString") {
      parts = geom["coordinates"];
    } else if (type == "LineString") {
      parts = json::array({geom["coordinates"]});
    } else {
      reject("unsupported geometry type '" + type + "'");
      continue;
    }

    DescriptiveFlowline rec;
    const json props = f.contains("properties") && f["properties"].is_object() ? f["properties"] : json::object();
    rec.source_row_id = props.contains("row_id") ? json_id(props["row_id"]) : std::to_string(row);
    if (rec.source_row_id.empty()) rec.source_row_id = std::to_string(row);
    rec.operator_name = props.contains("operator_name") && props["operator_name"].is_string()
                            ? trim(props["operator_name"].get<std::string>())
                            : std::string{};
    if (normalize_operator_name(rec.operator_name).empty()) {
      reject("missing operator_name");
      continue;
    }
    if (parts.empty()) {
      reject("empty geometry");
      continue;
    }

    std::string problem;
    for (const auto& part : parts) {
      if (!part.is_array()) {
        problem = "malformed member";
        break;
      }
      PolyLine line;
      for (const auto& c : part) {
        if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
          problem = "malformed coordinate";
          break;
        }
        const double x = c[0].get<double>();
        const double y = c[1].get<double>();
        if (!std::isfinite(x) || !std::isfinite(y)) {
          problem = "non-finite coordinate";
          break;
        }
        if (options.geographic) {
          try {
            line.vertices.push_back(project({y, x}, options.projection));
          } catch (const Error& e) {
            problem = std::string(to_string(e.kind()));
            break;
          }
        } else {
          line.vertices.emplace_back(x, y);
        }
      }
      if (!problem.empty()) break;
      if (line.vertices.size() < 2) {
        problem = "degenerate member";
        break;
      }
      rec.geometry.lines.push_back(std::move(line));
    }
    if (!problem.empty()) {
      reject(problem);
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

ParseResult<DescriptiveFlowline> parse_descriptive(const std::filesystem::path& path,
                                                   const DescriptiveOptions& options) {
  return parse_descriptive_text(read_file(path), path.filename().string(), options);
}

ParseResult<OperationalFlowline> parse_operational(const std::filesystem::path& path,
                                                   const OperationalOptions& options) {
  const auto table = csv::read(path);
  const auto col = resolve_columns(table, kOperationalHeader);
  const CategoryMap& categories = options.categories ? *options.categories : default_category_map();
  const std::string label = path.filename().string();

  ParseResult<OperationalFlowline> result;
  result.total_rows = table.rows.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r].fields;
    auto reject = [&](std::string reason) { result.rejects.push_back({label, r + 1, std::move(reason)}); };
    if (fields.size() != table.header.size()) {
      reject("expected " + std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    auto field = [&](std::size_t k) { return trim(fields[col[k]]); };
    auto categorical = [&](std::size_t k) {
      const std::string name(kOperationalHeader[k]);
      return categories.has_column(name) ? normalize_category(fields[col[k]], name, categories) : field(k);
    };

    OperationalFlowline rec;
    rec.source_row_id = field(0);
    if (rec.source_row_id.empty()) {
      reject("missing row_id");
      continue;
    }
    rec.operator_number = categorical(1);
    rec.flowline_id = categorical(2);
    rec.location_id = categorical(3);
    rec.status = categorical(4);
    rec.flowline_action = categorical(5);
    rec.location_type = categorical(6);
    rec.fluid_type = categorical(7);
    rec.material = categorical(8);

    std::string problem;
    auto number = [&](std::size_t k, double& out, bool strictly_positive) {
      if (!problem.empty()) return;
      const std::string name(kOperationalHeader[k]);
      if (field(k).empty()) {
        problem = "missing " + name;
        return;
      }
      auto v = parse_number(fields[col[k]]);
      if (!v) {
        problem = "unparseable " + name;
      } else if (strictly_positive ? !(*v > 0.0) : !(*v >= 0.0)) {
        problem = name + (strictly_positive ? " must be > 0" : " must be >= 0");
      } else {
        out = *v;
      }
    };
    number(9, rec.diameter_inches, true);
    number(10, rec.length_feet, false);
    number(11, rec.max_operating_pressure, false);
    auto coordinate = [&](std::size_t k, double& out) {
      if (!problem.empty()) return;
      auto v = parse_number(fields[col[k]]);
      if (!v) problem = "unparseable " + std::string(kOperationalHeader[k]);
      else out = *v;
    };
    coordinate(14, rec.start.latitude);
    coordinate(15, rec.start.longitude);
    coordinate(16, rec.end.latitude);
    coordinate(17, rec.end.longitude);
    if (!problem.empty()) {
      reject(problem);
      continue;
    }
    if (!rec.start.valid() || !rec.end.valid()) {
      reject("coordinates out of range");
      continue;
    }
    if (field(12).empty()) {
      reject("missing construction_date");
      continue;
    }
    auto date = Date::parse(field(12));
    if (!date) {
      reject("malformed construction_date");
      continue;
    }
    if (*date > options.reference_date) {
      reject("construction_date after reference date");
      continue;
    }
    rec.construction_date = *date;
    rec.operator_name = field(13);
    if (normalize_operator_name(rec.operator_name).empty()) {
      reject("missing operator_name");
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

ParseResult<SpillRecord> parse_spills(const std::filesystem::path& path, const SpillOptions& options) {
  const auto table = csv::read(path);
  const auto col = resolve_columns(table, kSpillHeader);
  const std::string label = path.filename().string();

  ParseResult<SpillRecord> result;
  result.total_rows = table.rows.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r].fields;
    auto reject = [&](std::string reason) { result.rejects.push_back({label, r + 1, std::move(reason)}); };
    if (fields.size() != table.header.size()) {
      reject("expected " + std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    auto field = [&](std::size_t k) { return trim(fields[col[k]]); };

    SpillRecord rec;
    rec.spill_id = field(0);
    if (rec.spill_id.empty()) {
      reject("missing spill_id");
      continue;
    }
    rec.operator_name = field(1);
    if (normalize_operator_name(rec.operator_name).empty()) {
      reject("missing operator_name");
      continue;
    }
    auto lat = parse_number(fields[col[2]]);
    auto lon = parse_number(fields[col[3]]);
    if (!lat || !lon) {
      reject("unparseable location");
      continue;
    }
    rec.location = {*lat, *lon};
    if (!rec.location.valid()) {
      reject("coordinates out of range");
      continue;
    }
    if (!(std::abs(rec.location.longitude - options.projection.central_meridian) < kMaxZoneOffsetDegrees)) {
      reject("location outside projection window");
      continue;
    }
    rec.root_cause_type = field(4);
    if (field(5).empty()) {
      reject("missing report_date");
      continue;
    }
    auto date = Date::parse(field(5));
    if (!date) {
      reject("malformed report_date");
      continue;
    }
    rec.report_date = *date;
    result.records.push_back(std::move(rec));
  }
  return result;
}

void write_descriptive(std::ostream& out, const std::vector<DescriptiveFlowline>& lines) {
  json features = json::array();
  for (const auto& line : lines) {
    json coords = json::array();
    for (const auto& part : line.geometry.lines) {
      json pts = json::array();
      for (const auto& v : part.vertices) pts.push_back({v.x(), v.y()});
      coords.push_back(std::move(pts));
    }
    features.push_back({{"type", "Feature"},
                        {"properties", {{"row_id", line.source_row_id}, {"operator_name", line.operator_name}}},
                        {"geometry", {{"type", "MultiLineString"}, {"coordinates", std::move(coords)}}}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  out << doc.dump() << '\n';
}

void write_operational(std::ostream& out, const std::vector<OperationalFlowline>& records) {
  csv::write_row(out, {std::begin(kOperationalHeader), std::end(kOperationalHeader)});
  for (const auto& r : records) {
    csv::write_row(out, {r.source_row_id, r.operator_number, r.flowline_id, r.location_id, r.status,
                         r.flowline_action, r.location_type, r.fluid_type, r.material,
                         csv::format_double(r.diameter_inches), csv::format_double(r.length_feet),
                         csv::format_double(r.max_operating_pressure), r.construction_date.to_string(),
                         r.operator_name, csv::format_double(r.start.latitude),
                         csv::format_double(r.start.longitude), csv::format_double(r.end.latitude),
                         csv::format_double(r.end.longitude)});
  }
}

void write_spills(std::ostream& out, const std::vector<SpillRecord>& spills) {
  csv::write_row(out, {std::begin(kSpillHeader), std::end(kSpillHeader)});
  for (const auto& s : spills) {
    csv::write_row(out, {s.spill_id, s.operator_name, csv::format_double(s.location.latitude),
                         csv::format_double(s.location.longitude), s.root_cause_type, s.report_date.to_string()});
  }
}

void write_diagnostics(std::ostream& out, const std::vector<Diagnostic>& diagnostics) {
  csv::write_row(out, {"file", "row", "reason"});
  for (const auto& d : diagnostics) csv::write_row(out, {d.file, std::to_string(d.row), d.reason});
}

}  // namespace flowrisk
