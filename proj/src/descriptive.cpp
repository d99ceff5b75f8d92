#include "msvar/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msvar/error.hpp"

namespace msvar::stats {

ReturnSeries log_returns(const data::PriceSeries& levels) {
  if (levels.size() < 2)
    throw Error(ErrorCode::insufficient_data, levels.name + ": need at least two levels");
  for (double v : levels.values)
    if (!(v > 0.0)) throw Error(ErrorCode::domain, levels.name + ": non-positive level");
  ReturnSeries r;
  r.name = levels.name;
  r.periods.assign(levels.periods.begin() + 1, levels.periods.end());
  r.values.resize(levels.size() - 1);
  for (std::size_t t = 0; t + 1 < levels.size(); ++t)
    r.values[t] = std::log(levels.values[t + 1] / levels.values[t]);
  return r;
}

std::vector<double> log_levels(const data::PriceSeries& levels) {
  std::vector<double> out(levels.size());
  for (std::size_t t = 0; t < levels.size(); ++t) {
    if (!(levels.values[t] > 0.0))
      throw Error(ErrorCode::domain, levels.name + ": non-positive level");
    out[t] = std::log(levels.values[t]);
  }
  return out;
}

double chi2_2_sf(double x) { return x <= 0.0 ? 1.0 : std::exp(-0.5 * x); }

JarqueBera jarque_bera(std::size_t n, double skewness, double kurtosis) {
  const double ex = kurtosis - 3.0;
  const double jb = static_cast<double>(n) / 6.0 * (skewness * skewness + ex * ex / 4.0);
  return {jb, chi2_2_sf(jb)};
}

JarqueBera jarque_bera(const DescriptiveStats& s) {
  if (s.count < 2) throw Error(ErrorCode::insufficient_data, "jarque_bera: count < 2");
  if (!std::isfinite(s.skewness) || !std::isfinite(s.kurtosis))
    throw Error(ErrorCode::degenerate_input, "jarque_bera: undefined moments");
  return jarque_bera(s.count, s.skewness, s.kurtosis);
}

DescriptiveStats summarize(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw Error(ErrorCode::insufficient_data, "summarize: need at least two values");
  for (double v : values)
    if (!std::isfinite(v)) throw Error(ErrorCode::domain, "summarize: non-finite value");

  // Sorting first makes every accumulation order-free, so permuted inputs
  // produce bit-identical results.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  DescriptiveStats s;
  s.count = n;
  const double dn = static_cast<double>(n);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / dn;
  s.minimum = sorted.front();
  s.maximum = sorted.back();
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : sorted) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  s.std_dev = std::sqrt(m2 / (dn - 1.0));
  m2 /= dn;
  m3 /= dn;
  m4 /= dn;
  // Relative threshold: a constant shifted by rounding still counts as constant.
  const double scale = std::max(std::abs(s.maximum), std::abs(s.minimum));
  if (m2 <= 0.0 || std::sqrt(m2) <= 1e-14 * scale)
    throw Error(ErrorCode::degenerate_input, "summarize: zero variance, skewness/kurtosis undefined");
  s.skewness = m3 / std::pow(m2, 1.5);
  s.kurtosis = m4 / (m2 * m2);
  const auto jb = jarque_bera(n, s.skewness, s.kurtosis);
  s.jarque_bera = jb.statistic;
  s.jarque_bera_p = jb.p_value;
  return s;
}

}  // namespace msvar::stats
