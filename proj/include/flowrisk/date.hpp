#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flowrisk {

/// Proleptic Gregorian calendar date.
struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  /// Days since 1970-01-01.
  std::int64_t days_since_epoch() const noexcept;
  static Date from_days(std::int64_t days) noexcept;

  /// Strict YYYY-MM-DD; nullopt on any malformed or impossible date.
  static std::optional<Date> parse(std::string_view text);
  static Date today();

  std::string to_string() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

}  // namespace flowrisk
