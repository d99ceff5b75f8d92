#include "msvar/plot_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "msvar/error.hpp"

namespace msvar::pipeline {

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (ec || !f) throw Error(ErrorCode::output, "cannot write " + path.string());
  return f;
}

void finish(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f) throw Error(ErrorCode::output, "write failed for " + path.string());
}

const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

// Minimal line chart: one polyline per series, shared x axis over periods.
std::string svg_lines(const std::string& title, const std::vector<Month>& periods,
                      const std::vector<std::vector<double>>& series, const std::vector<std::string>& labels,
                      std::size_t offset_of_first = 0) {
  const double W = 900, H = 320, L = 60, R = 20, Tp = 30, B = 40;
  double lo = 0, hi = 1;
  bool first = true;
  for (const auto& s : series)
    for (double v : s) {
      if (!std::isfinite(v)) continue;
      if (first) lo = hi = v, first = false;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi - lo < 1e-12) hi = lo + 1;
  const double n = std::max<double>(1.0, static_cast<double>(periods.size()) - 1.0);
  auto px = [&](double i) { return L + (W - L - R) * i / n; };
  auto py = [&](double v) { return Tp + (H - Tp - B) * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << L << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << Tp << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<text x=\"5\" y=\"" << py(hi) + 4 << "\" font-family=\"sans-serif\" font-size=\"10\">" << hi << "</text>\n";
  s << "<text x=\"5\" y=\"" << py(lo) + 4 << "\" font-family=\"sans-serif\" font-size=\"10\">" << lo << "</text>\n";
  if (!periods.empty()) {
    s << "<text x=\"" << L << "\" y=\"" << H - B + 15 << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << periods.front().str() << "</text>\n";
    s << "<text x=\"" << W - R - 40 << "\" y=\"" << H - B + 15 << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << periods.back().str() << "</text>\n";
  }
  for (std::size_t j = 0; j < series.size(); ++j) {
    s << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << kColours[j % 6] << "\" points=\"";
    const std::size_t off = series[j].size() < periods.size() ? offset_of_first : 0;
    for (std::size_t i = 0; i < series[j].size(); ++i) {
      if (!std::isfinite(series[j][i])) continue;
      s << px(static_cast<double>(i + off)) << ',' << py(series[j][i]) << ' ';
    }
    s << "\"/>\n";
    s << "<text x=\"" << W - R - 150 << "\" y=\"" << Tp + 14 * (j + 1) << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\" fill=\"" << kColours[j % 6] << "\">" << labels[j] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

std::vector<std::filesystem::path> emit_probability_plot_data(const ms::FilterOutput& filter,
                                                              const ms::SmoothedOutput& smoothed,
                                                              const std::vector<Month>& periods,
                                                              const std::filesystem::path& out,
                                                              const std::string& stem, bool svg) {
  const std::size_t n = filter.filtered.n_rows, m = filter.filtered.n_cols;
  if (periods.size() != n || smoothed.smoothed.n_rows != n || smoothed.smoothed.n_cols != m)
    throw Error(ErrorCode::domain, "plot data: probabilities and periods are not aligned");

  std::vector<std::filesystem::path> paths;
  const auto csv = out / (stem + ".csv");
  auto f = open_for_write(csv);
  f << "period";
  for (std::size_t j = 0; j < m; ++j) f << ",filtered_regime_" << j + 1;
  for (std::size_t j = 0; j < m; ++j) f << ",smoothed_regime_" << j + 1;
  f << '\n';
  for (std::size_t t = 0; t < n; ++t) {
    f << periods[t].str();
    for (std::size_t j = 0; j < m; ++j) f << ',' << format_number(filter.filtered(t, j));
    for (std::size_t j = 0; j < m; ++j) f << ',' << format_number(smoothed.smoothed(t, j));
    f << '\n';
  }
  finish(f, csv);
  paths.push_back(csv);

  if (svg) {
    std::vector<std::vector<double>> traces(m);
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < m; ++j) {
      traces[j] = arma::conv_to<std::vector<double>>::from(filter.filtered.col(j));
      labels.push_back("filtered regime " + std::to_string(j + 1));
    }
    const auto path = out / (stem + ".svg");
    auto g = open_for_write(path);
    g << svg_lines("Filtered regime probabilities", periods, traces, labels);
    finish(g, path);
    paths.push_back(path);
  }
  return paths;
}

std::vector<std::filesystem::path> emit_levels_plot_data(const LevelsAndReturns& d,
                                                         const std::filesystem::path& out,
                                                         const std::string& stem, bool svg) {
  const std::size_t n = d.periods.size(), k = d.names.size();
  if (d.log_levels.size() != k || d.returns.size() != k)
    throw Error(ErrorCode::domain, "plot data: series count mismatch");
  for (std::size_t j = 0; j < k; ++j)
    if (d.log_levels[j].size() != n || d.returns[j].size() + 1 != n)
      throw Error(ErrorCode::domain, "plot data: series and periods are not aligned");

  std::vector<std::filesystem::path> paths;
  const auto csv = out / (stem + ".csv");
  auto f = open_for_write(csv);
  f << "period";
  for (const auto& name : d.names) f << ",log_" << name;
  for (const auto& name : d.names) f << ",return_" << name;
  f << '\n';
  for (std::size_t t = 0; t < n; ++t) {
    f << d.periods[t].str();
    for (std::size_t j = 0; j < k; ++j) f << ',' << format_number(d.log_levels[j][t]);
    for (std::size_t j = 0; j < k; ++j) {
      f << ',';
      if (t > 0) f << format_number(d.returns[j][t - 1]);
    }
    f << '\n';
  }
  finish(f, csv);
  paths.push_back(csv);

  if (svg) {
    std::vector<std::string> level_labels, return_labels;
    for (const auto& name : d.names) {
      level_labels.push_back("log " + name);
      return_labels.push_back("return " + name);
    }
    const auto lp = out / (stem + "_levels.svg");
    auto g = open_for_write(lp);
    g << svg_lines("Natural logarithms", d.periods, d.log_levels, level_labels);
    finish(g, lp);
    paths.push_back(lp);
    const auto rp = out / (stem + "_returns.svg");
    auto h = open_for_write(rp);
    h << svg_lines("Returns", d.periods, d.returns, return_labels, 1);
    finish(h, rp);
    paths.push_back(rp);
  }
  return paths;
}

}  // namespace msvar::pipeline
