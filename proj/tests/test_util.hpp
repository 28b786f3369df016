#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "flowrisk/geometry.hpp"

namespace testutil {

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("flowrisk_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline flowrisk::MultiLine random_multiline(std::mt19937_64& gen, int max_members = 4, int max_vertices = 8) {
  std::uniform_int_distribution<int> members(1, max_members);
  std::uniform_int_distribution<int> vertices(2, max_vertices);
  std::uniform_real_distribution<double> coord(-1000.0, 1000.0);
  flowrisk::MultiLine g;
  const int m = members(gen);
  for (int i = 0; i < m; ++i) {
    flowrisk::PolyLine line;
    const int n = vertices(gen);
    for (int j = 0; j < n; ++j) line.vertices.emplace_back(coord(gen), coord(gen));
    g.lines.push_back(std::move(line));
  }
  return g;
}

}  // namespace testutil
