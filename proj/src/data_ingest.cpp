#include "msvar/data_ingest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "httplib.h"

#include "msvar/error.hpp"

namespace msvar::data {

namespace fs = std::filesystem;

bool SeriesSource::is_remote() const {
  return source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0;
}

void DatasetConfig::validate_for_pipeline() const {
  if (series.size() < 2)
    throw Error(ErrorCode::config, "at least two series are required");
  if (window.start && window.end && *window.start > *window.end)
    throw Error(ErrorCode::config, "sample window start is after its end");
}

void validate(const PriceSeries& s) {
  if (s.periods.size() != s.values.size())
    throw Error(ErrorCode::validation, s.name + ": periods and values differ in length");
  if (s.values.size() < 2)
    throw Error(ErrorCode::validation, s.name + ": fewer than two observations");
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (!std::isfinite(s.values[i]) || s.values[i] <= 0.0)
      throw Error(ErrorCode::validation,
                  s.name + ": non-positive level at " + s.periods[i].str());
    if (i > 0 && !(s.periods[i - 1] < s.periods[i]))
      throw Error(ErrorCode::validation,
                  s.name + ": periods not strictly increasing at " + s.periods[i].str());
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// RFC 4180-ish split of a single line; quoted fields may contain commas.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.emplace_back(trim(field));
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

struct Observation {
  Month month;
  int day;
  double value;
  std::size_t line;
};

}  // namespace

PriceSeries parse_csv(std::string_view raw, const SeriesSource& src,
                      const SampleWindow& window) {
  if (raw.size() >= 3 && raw.substr(0, 3) == "\xEF\xBB\xBF") raw.remove_prefix(3);

  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos <= raw.size();) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    lines.push_back(raw.substr(pos, nl - pos));
    pos = nl + 1;
  }
  std::size_t header_idx = 0;
  while (header_idx < lines.size() && trim(lines[header_idx]).empty()) ++header_idx;
  if (header_idx == lines.size())
    throw Error(ErrorCode::schema, src.name + ": empty input");

  const auto header = split_csv_line(lines[header_idx]);
  auto column = [&](const std::string& wanted) {
    auto it = std::find(header.begin(), header.end(), wanted);
    if (it == header.end())
      throw Error(ErrorCode::schema, src.name + ": missing column '" + wanted + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t date_col = column(src.date_column);
  const std::size_t value_col = column(src.value_column);

  std::vector<Observation> obs;
  for (std::size_t i = header_idx + 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::size_t line_no = i + 1;
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() <= std::max(date_col, value_col))
      throw RowError(line_no, "too few fields");
    auto date = parse_date(fields[date_col]);
    if (!date) throw RowError(line_no, "unparsable date '" + fields[date_col] + "'");
    const bool has_day = date->day != 0;
    if ((src.layout == DateLayout::year_month && has_day) ||
        (src.layout == DateLayout::year_month_day && !has_day))
      throw RowError(line_no, "date '" + fields[date_col] + "' does not match the configured layout");
    if (!window.contains(date->month)) continue;
    auto value = parse_double(fields[value_col]);
    if (!value) throw RowError(line_no, "unparsable value '" + fields[value_col] + "'");
    obs.push_back({date->month, date->day, *value, line_no});
  }

  std::stable_sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b) {
    return std::pair(a.month, a.day) < std::pair(b.month, b.day);
  });

  PriceSeries out;
  out.name = src.name;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i > 0 && obs[i].month == obs[i - 1].month) {
      if (obs[i].day == 0 || obs[i].day == obs[i - 1].day)
        throw Error(ErrorCode::validation,
                    src.name + ": duplicate observation for " + obs[i].month.str() +
                        " (line " + std::to_string(obs[i].line) + ")");
      out.values.back() = obs[i].value;  // keep the month's last observation
      continue;
    }
    out.periods.push_back(obs[i].month);
    out.values.push_back(obs[i].value);
  }
  validate(out);
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::fetch, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path cache_path(const std::string& url, const fs::path& cache_dir) {
  return cache_dir / sha256_hex(url);
}

namespace {

std::shared_ptr<std::mutex> url_lock(const std::string& url) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::shared_ptr<std::mutex>> registry;
  std::lock_guard lock(registry_mutex);
  auto& m = registry[url];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

std::string download(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FetchError(0, "malformed URL " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  auto res = client.Get(path);
  if (!res)
    throw FetchError(0, "request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw FetchError(res->status, "GET " + url + " returned HTTP " + std::to_string(res->status));
  return res->body;
}

}  // namespace

std::string fetch_remote(const std::string& url, const fs::path& cache_dir, bool refresh) {
  auto lock_ptr = url_lock(url);
  std::lock_guard lock(*lock_ptr);

  const fs::path target = cache_path(url, cache_dir);
  if (!refresh && fs::exists(target)) return read_file(target);

  std::string body = download(url);
  std::error_code ec;
  fs::create_directories(cache_dir, ec);
  const fs::path tmp = target.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FetchError(0, "cannot write cache file " + tmp.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw FetchError(0, "short write to cache file " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw FetchError(0, "cannot install cache file " + target.string() + ": " + ec.message());
  return body;
}

std::pair<PriceSeries, PriceSeries> align_series(const PriceSeries& a, const PriceSeries& b) {
  if (a.size() == 0 || b.size() == 0)
    throw Error(ErrorCode::alignment, "cannot align an empty series");
  PriceSeries oa{a.name, {}, {}}, ob{b.name, {}, {}};
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a.periods[i] < b.periods[j]) {
      ++i;
    } else if (b.periods[j] < a.periods[i]) {
      ++j;
    } else {
      oa.periods.push_back(a.periods[i]);
      oa.values.push_back(a.values[i]);
      ob.periods.push_back(b.periods[j]);
      ob.values.push_back(b.values[j]);
      ++i;
      ++j;
    }
  }
  if (oa.size() == 0)
    throw Error(ErrorCode::alignment, a.name + " and " + b.name + " share no months");
  return {std::move(oa), std::move(ob)};
}

LoadedSeries load_series(const SeriesSource& src, const DatasetConfig& cfg, bool refetch) {
  std::string raw = src.is_remote() ? fetch_remote(src.source, cfg.cache_dir, refetch)
                                    : read_file(src.source);
  LoadedSeries out;
  out.sha256 = sha256_hex(raw);
  out.series = parse_csv(raw, src, cfg.window);
  return out;
}

}  // namespace msvar::data
