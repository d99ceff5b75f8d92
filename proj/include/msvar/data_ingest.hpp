#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msvar/month.hpp"

namespace msvar::data {

// Monthly level series. Invariants are enforced by validate().
struct PriceSeries {
  std::string name;
  std::vector<Month> periods;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

enum class DateLayout { automatic, year_month, year_month_day };

struct SeriesSource {
  std::string name;
  std::string source;  // local path, or http(s):// URL
  std::string date_column = "date";
  std::string value_column = "value";
  DateLayout layout = DateLayout::automatic;

  bool is_remote() const;
};

struct SampleWindow {
  std::optional<Month> start;
  std::optional<Month> end;

  bool contains(Month m) const {
    return (!start || m >= *start) && (!end || m <= *end);
  }
};

struct DatasetConfig {
  std::vector<SeriesSource> series;
  std::filesystem::path cache_dir = "cache";
  SampleWindow window;

  // Throws ErrorCode::config unless start <= end and at least two series are set.
  void validate_for_pipeline() const;
};

// Throws ErrorCode::validation when a type invariant does not hold.
void validate(const PriceSeries& s);

// Parses one CSV source into a monthly series restricted to the window.
// With a day-resolution layout, the last observation of each month is kept;
// with a month layout, a repeated month is a validation error.
PriceSeries parse_csv(std::string_view raw, const SeriesSource& src,
                      const SampleWindow& window = {});

// Returns the cached body for url when present (and refresh is false),
// otherwise downloads it and stores it under cache_dir/<sha256(url)>.
std::string fetch_remote(const std::string& url,
                         const std::filesystem::path& cache_dir,
                         bool refresh = false);

std::filesystem::path cache_path(const std::string& url,
                                 const std::filesystem::path& cache_dir);

// Restricts both series to their common months.
std::pair<PriceSeries, PriceSeries> align_series(const PriceSeries& a,
                                                 const PriceSeries& b);

struct LoadedSeries {
  PriceSeries series;
  std::string sha256;  // of the raw bytes that were parsed
};

LoadedSeries load_series(const SeriesSource& src, const DatasetConfig& cfg,
                         bool refetch = false);

std::string read_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace msvar::data
