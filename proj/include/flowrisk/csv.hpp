#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowrisk::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line number of the record start
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column position by exact header name.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// RFC 4180-style reader: comma separated, double-quote escaping, CRLF or LF.
/// Throws Error(FileUnreadable) when the file cannot be opened.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

std::string escape(std::string_view field);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace flowrisk::csv
