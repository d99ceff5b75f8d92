#include "msvar/month.hpp"

#include <charconv>
#include <cstdio>

namespace msvar {

std::string Month::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::optional<ParsedDate> parse_date(std::string_view text) {
  ParsedDate d;
  if (text.size() != 7 && text.size() != 10) return std::nullopt;
  if (text[4] != '-') return std::nullopt;
  if (!parse_int(text.substr(0, 4), d.month.year)) return std::nullopt;
  if (!parse_int(text.substr(5, 2), d.month.month)) return std::nullopt;
  if (d.month.month < 1 || d.month.month > 12) return std::nullopt;
  if (text.size() == 10) {
    if (text[7] != '-') return std::nullopt;
    if (!parse_int(text.substr(8, 2), d.day)) return std::nullopt;
    if (d.day < 1 || d.day > 31) return std::nullopt;
  }
  return d;
}

}  // namespace msvar
