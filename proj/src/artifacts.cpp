#include "flowrisk/artifacts.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flowrisk/error.hpp"

namespace flowrisk {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::MissingArtifact, "cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::FileUnreadable, "cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::uint64_t file_hash(const std::filesystem::path& path) { return fnv1a(read_text(path)); }

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(1) + "\n"); }

json StageManifest::to_json() const {
  return {{"stage", stage}, {"config_hash", config_hash}, {"inputs", inputs}, {"outputs", outputs}};
}

StageManifest StageManifest::from_json(const json& j) {
  StageManifest m;
  m.stage = j.at("stage").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  return m;
}

std::filesystem::path RunDirectory::manifest_path(const std::string& stage) const {
  return root_ / (stage + ".manifest.json");
}

std::filesystem::path RunDirectory::require(const std::string& stage, const std::string& name) const {
  const auto mpath = manifest_path(stage);
  if (!std::filesystem::exists(mpath)) {
    throw Error(ErrorKind::MissingArtifact, "stage '" + stage + "' has not run in " + root_.string());
  }
  StageManifest m;
  try {
    m = StageManifest::from_json(read_json(mpath));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, mpath.string() + ": " + e.what());
  }
  auto it = m.outputs.find(name);
  const auto p = path(name);
  if (it == m.outputs.end() || !std::filesystem::exists(p)) {
    throw Error(ErrorKind::MissingArtifact, "artifact '" + name + "' from stage '" + stage + "' is missing");
  }
  if (hex64(file_hash(p)) != it->second) {
    throw Error(ErrorKind::SchemaHashMismatch, "artifact '" + name + "' changed since stage '" + stage + "' wrote it");
  }
  return p;
}

void RunDirectory::commit(const std::string& stage, const std::string& config_hash,
                          const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) const {
  StageManifest m;
  m.stage = stage;
  m.config_hash = config_hash;
  for (const auto& name : inputs) m.inputs[name] = hex64(file_hash(path(name)));
  for (const auto& name : outputs) m.outputs[name] = hex64(file_hash(path(name)));
  write_json(manifest_path(stage), m.to_json());
}

void RunDirectory::log(const std::string& line) const {
  std::filesystem::create_directories(root_);
  std::ofstream f(root_ / "run.log", std::ios::app);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  f << stamp << ' ' << line << '\n';
}

json to_json(const OperationalFlowline& r) {
  return {{"row_id", r.source_row_id},
          {"operator_number", r.operator_number},
          {"flowline_id", r.flowline_id},
          {"location_id", r.location_id},
          {"status", r.status},
          {"flowline_action", r.flowline_action},
          {"location_type", r.location_type},
          {"fluid_type", r.fluid_type},
          {"material", r.material},
          {"diameter_in", r.diameter_inches},
          {"length_ft", r.length_feet},
          {"max_op_pressure", r.max_operating_pressure},
          {"construction_date", r.construction_date.to_string()},
          {"operator_name", r.operator_name},
          {"start", {r.start.latitude, r.start.longitude}},
          {"end", {r.end.latitude, r.end.longitude}}};
}

OperationalFlowline operational_from_json(const json& j) {
  OperationalFlowline r;
  r.source_row_id = j.at("row_id").get<std::string>();
  r.operator_number = j.at("operator_number").get<std::string>();
  r.flowline_id = j.at("flowline_id").get<std::string>();
  r.location_id = j.at("location_id").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.flowline_action = j.at("flowline_action").get<std::string>();
  r.location_type = j.at("location_type").get<std::string>();
  r.fluid_type = j.at("fluid_type").get<std::string>();
  r.material = j.at("material").get<std::string>();
  r.diameter_inches = j.at("diameter_in").get<double>();
  r.length_feet = j.at("length_ft").get<double>();
  r.max_operating_pressure = j.at("max_op_pressure").get<double>();
  const auto date = Date::parse(j.at("construction_date").get<std::string>());
  if (!date) throw Error(ErrorKind::SchemaViolation, "bad construction_date in artifact");
  r.construction_date = *date;
  r.operator_name = j.at("operator_name").get<std::string>();
  r.start = {j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()};
  r.end = {j.at("end").at(0).get<double>(), j.at("end").at(1).get<double>()};
  return r;
}

json to_json(const MergedFlowline& m) {
  json lines = json::array();
  for (const auto& line : m.geometry.lines) {
    json vs = json::array();
    for (const auto& v : line.vertices) vs.push_back({v.x(), v.y()});
    lines.push_back(std::move(vs));
  }
  return {{"operational", to_json(m.operational)},
          {"descriptive_id", m.descriptive_id},
          {"geometry", std::move(lines)},
          {"operator_name", m.operator_name},
          {"match_tolerance", m.match_tolerance},
          {"d_start", m.d_start},
          {"d_end", m.d_end},
          {"risk", m.risk}};
}

MergedFlowline merged_from_json(const json& j) {
  MergedFlowline m;
  m.operational = operational_from_json(j.at("operational"));
  m.descriptive_id = j.at("descriptive_id").get<std::string>();
  for (const auto& line : j.at("geometry")) {
    PolyLine pl;
    for (const auto& v : line) pl.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    m.geometry.lines.push_back(std::move(pl));
  }
  m.operator_name = j.at("operator_name").get<std::string>();
  m.match_tolerance = j.at("match_tolerance").get<double>();
  m.d_start = j.at("d_start").get<double>();
  m.d_end = j.at("d_end").get<double>();
  m.risk = j.at("risk").get<int>();
  return m;
}

json merged_to_json(const std::vector<MergedFlowline>& merged) {
  json out = json::array();
  for (const auto& m : merged) out.push_back(to_json(m));
  return out;
}

std::vector<MergedFlowline> merged_from_json_array(const json& j) {
  std::vector<MergedFlowline> out;
  try {
    for (const auto& item : j) out.push_back(merged_from_json(item));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("merged artifact: ") + e.what());
  }
  return out;
}

}  // namespace flowrisk
