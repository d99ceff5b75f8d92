#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace msvar {

struct Month {
  int year = 1970;
  int month = 1;  // 1..12

  auto operator<=>(const Month&) const = default;

  // Months since year 0; used for arithmetic and contiguity checks.
  int index() const { return year * 12 + (month - 1); }
  static Month from_index(int idx) { return Month{idx / 12, idx % 12 + 1}; }
  Month next() const { return from_index(index() + 1); }

  std::string str() const;  // "YYYY-MM"
};

// Accepts "YYYY-MM" or "YYYY-MM-DD"; day is returned separately when present.
struct ParsedDate {
  Month month;
  int day = 0;  // 0 when the layout has no day
};
std::optional<ParsedDate> parse_date(std::string_view text);

}  // namespace msvar
