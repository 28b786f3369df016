#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowrisk/matcher.hpp"

namespace flowrisk {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// FNV-1a of the file bytes. Throws Error(MissingArtifact) if absent.
std::uint64_t file_hash(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
/// Writes the whole file, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed with sorted keys and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Record of what a stage read and wrote, stored as <stage>.manifest.json in
/// the run directory. File names are relative to the run directory.
struct StageManifest {
  std::string stage;
  std::string config_hash;
  std::map<std::string, std::string> inputs;   // name -> hex content hash
  std::map<std::string, std::string> outputs;  // name -> hex content hash

  nlohmann::json to_json() const;
  static StageManifest from_json(const nlohmann::json& j);
};

class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& name) const { return root_ / name; }
  std::filesystem::path manifest_path(const std::string& stage) const;

  /// Path of `name` after checking that `stage` produced it and that its
  /// bytes still hash to the recorded value. Throws Error(MissingArtifact)
  /// or Error(SchemaHashMismatch).
  std::filesystem::path require(const std::string& stage, const std::string& name) const;

  /// Hashes the named outputs and writes the stage manifest.
  void commit(const std::string& stage, const std::string& config_hash, const std::vector<std::string>& inputs,
              const std::vector<std::string>& outputs) const;

  /// Appends one line to run.log.
  void log(const std::string& line) const;

 private:
  std::filesystem::path root_;
};

nlohmann::json to_json(const OperationalFlowline& r);
OperationalFlowline operational_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MergedFlowline& m);
MergedFlowline merged_from_json(const nlohmann::json& j);
nlohmann::json merged_to_json(const std::vector<MergedFlowline>& merged);
std::vector<MergedFlowline> merged_from_json_array(const nlohmann::json& j);

}  // namespace flowrisk
