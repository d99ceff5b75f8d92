#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "msvar/hamilton.hpp"
#include "msvar/month.hpp"

namespace msvar::pipeline {

// Writes <stem>.csv with columns period, filtered_regime_1..m,
// smoothed_regime_1..m and, when svg is set, <stem>.svg with the filtered
// traces. Throws ErrorCode::output when the directory is not writable.
std::vector<std::filesystem::path> emit_probability_plot_data(
    const ms::FilterOutput& filter, const ms::SmoothedOutput& smoothed,
    const std::vector<Month>& periods, const std::filesystem::path& out,
    const std::string& stem = "regime_probabilities", bool svg = true);

// Log levels and returns per period (returns blank in the first period).
struct LevelsAndReturns {
  std::vector<std::string> names;
  std::vector<Month> periods;
  std::vector<std::vector<double>> log_levels;  // per series, one per period
  std::vector<std::vector<double>> returns;     // per series, one per period after the first
};

std::vector<std::filesystem::path> emit_levels_plot_data(const LevelsAndReturns& d,
                                                         const std::filesystem::path& out,
                                                         const std::string& stem = "levels_returns",
                                                         bool svg = true);

// Full-precision decimal used in every emitted file.
std::string format_number(double v);

}  // namespace msvar::pipeline
