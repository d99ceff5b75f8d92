#pragma once

#include <span>
#include <string>
#include <vector>

#include "msvar/data_ingest.hpp"

namespace msvar::stats {

// Log returns r_t = ln(P_t / P_{t-1}); periods start one month after the levels.
struct ReturnSeries {
  std::string name;
  std::vector<Month> periods;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct DescriptiveStats {
  double mean = 0.0;
  double median = 0.0;
  double maximum = 0.0;
  double minimum = 0.0;
  double std_dev = 0.0;   // sample, divisor n-1
  double skewness = 0.0;  // m3 / m2^(3/2), central moments with divisor n
  double kurtosis = 0.0;  // raw (normal = 3)
  double jarque_bera = 0.0;
  double jarque_bera_p = 1.0;
  std::size_t count = 0;
};

struct JarqueBera {
  double statistic;
  double p_value;
};

ReturnSeries log_returns(const data::PriceSeries& levels);

std::vector<double> log_levels(const data::PriceSeries& levels);

// Throws ErrorCode::degenerate_input for zero variance (moment ratios undefined).
DescriptiveStats summarize(std::span<const double> values);

JarqueBera jarque_bera(const DescriptiveStats& s);
JarqueBera jarque_bera(std::size_t n, double skewness, double kurtosis);

// Upper tail of chi-square(2): exp(-x/2).
double chi2_2_sf(double x);

}  // namespace msvar::stats
