#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "msvar/data_ingest.hpp"
#include "msvar/descriptive.hpp"
#include "msvar/em.hpp"
#include "msvar/fixture.hpp"
#include "msvar/pipeline.hpp"
#include "msvar/plot_data.hpp"
#include "msvar/report.hpp"

namespace pl = msvar::pipeline;
namespace data = msvar::data;

namespace {

struct SeriesOpts {
  std::string name, source, date_column = "date", value_column = "value", layout = "auto";
};

struct Options {
  SeriesOpts s1{"TSX"}, s2{"WTI"};
  std::string cache_dir = "cache", start, end;
  std::string out = "out";
  std::uint64_t seed = 20211001;
  std::size_t pmax = 8, regimes = 2, lags = 2, max_iter = 500, restarts = 10, threads = 1;
  bool switching_cov = false, refetch = false, no_svg = false, univariate = false;
  double tolerance = 1e-8;
  std::vector<std::string> candidates{"2:1:msi", "2:2:msi", "2:1:msih", "2:2:msih"};
  std::string results;
};

void add_series(CLI::App& app, SeriesOpts& s, const std::string& prefix) {
  app.add_option("--" + prefix + "-name", s.name, "Series name")->capture_default_str();
  app.add_option("--" + prefix + "-source", s.source, "Local CSV path or http(s) URL");
  app.add_option("--" + prefix + "-date-column", s.date_column, "Date column header")->capture_default_str();
  app.add_option("--" + prefix + "-value-column", s.value_column, "Value column header")->capture_default_str();
  app.add_option("--" + prefix + "-layout", s.layout, "Date layout: auto, month or day")
      ->check(CLI::IsMember({"auto", "month", "day"}))
      ->capture_default_str();
}

std::optional<msvar::Month> month_arg(const std::string& text, const char* what) {
  if (text.empty()) return std::nullopt;
  auto d = msvar::parse_date(text);
  if (!d) throw msvar::Error(msvar::ErrorCode::config, std::string("bad ") + what + " '" + text + "'");
  return d->month;
}

data::SeriesSource to_source(const SeriesOpts& s) {
  data::SeriesSource src;
  src.name = s.name;
  src.source = s.source;
  src.date_column = s.date_column;
  src.value_column = s.value_column;
  src.layout = s.layout == "month" ? data::DateLayout::year_month
               : s.layout == "day" ? data::DateLayout::year_month_day
                                   : data::DateLayout::automatic;
  return src;
}

data::DatasetConfig dataset(const Options& o) {
  data::DatasetConfig ds;
  ds.series = {to_source(o.s1), to_source(o.s2)};
  ds.cache_dir = o.cache_dir;
  ds.window.start = month_arg(o.start, "start");
  ds.window.end = month_arg(o.end, "end");
  ds.validate_for_pipeline();
  return ds;
}

pl::PipelineConfig pipeline_config(const Options& o) {
  pl::PipelineConfig c;
  c.dataset = dataset(o);
  c.pmax = o.pmax;
  c.regimes = o.regimes;
  c.lags = o.lags;
  c.switching_cov = o.switching_cov;
  std::string joined;
  for (const auto& item : o.candidates) joined += item + ",";
  c.candidates = pl::parse_candidates(joined);
  c.tolerance = o.tolerance;
  c.max_iter = o.max_iter;
  c.restarts = o.restarts;
  c.threads = o.threads;
  c.seed = o.seed;
  c.out = o.out;
  c.refetch = o.refetch;
  c.write_svg = !o.no_svg;
  c.validate();
  return c;
}

int fail(const msvar::Error& e) {
  const pl::Stage s = pl::stage_for(e.code());
  std::cerr << "error [" << pl::to_string(s) << "] " << msvar::to_string(e.code()) << ": " << e.what() << '\n';
  return pl::exit_code(s);
}

int cmd_fetch(const Options& o) {
  const auto ds = dataset(o);
  for (const auto& src : ds.series) {
    const auto loaded = data::load_series(src, ds, o.refetch);
    std::cout << src.name << "  " << loaded.series.size() << " months  " << loaded.series.periods.front().str()
              << " to " << loaded.series.periods.back().str() << "  sha256 " << loaded.sha256;
    if (src.is_remote()) std::cout << "  cache " << data::cache_path(src.source, ds.cache_dir).string();
    std::cout << '\n';
  }
  return 0;
}

int cmd_run(const Options& o) {
  const auto cfg = pipeline_config(o);
  try {
    const auto bundle = pl::run_pipeline(cfg);
    std::cout << bundle.report;
    for (const auto& f : bundle.files) std::cerr << "wrote " << f.string() << '\n';
    return 0;
  } catch (const pl::StageError& e) {
    std::cerr << "error " << e.what() << '\n';
    return e.exit_code();
  }
}

int cmd_fit(const Options& o) {
  const auto ds = dataset(o);
  std::vector<data::PriceSeries> raw;
  for (const auto& src : ds.series) raw.push_back(data::load_series(src, ds, o.refetch).series);
  auto [a, b] = data::align_series(raw[0], raw[1]);
  const auto ra = msvar::stats::log_returns(a), rb = msvar::stats::log_returns(b);
  const std::size_t k = o.univariate ? 1 : 2;
  arma::mat R(ra.size(), k);
  for (std::size_t t = 0; t < ra.size(); ++t) {
    R(t, 0) = ra.values[t];
    if (k == 2) R(t, 1) = rb.values[t];
  }
  msvar::ms::MsVarSpec spec{o.regimes, o.lags, k, o.switching_cov};
  msvar::ms::FitOptions opts;
  opts.tol = o.tolerance;
  opts.max_iter = o.max_iter;
  opts.restarts = o.restarts;
  opts.threads = o.threads;
  opts.seed = pl::derive_seed(o.seed, "fit:" + spec.label());
  const auto fit = msvar::ms::fit(R, spec, opts);

  std::vector<msvar::Month> periods(ra.periods.begin() + static_cast<long>(spec.p), ra.periods.end());
  std::vector<std::string> names{a.name};
  if (k == 2) names.push_back(b.name);
  const auto doc = pl::fit_to_json(fit, periods, names);
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / "fit.json";
  std::ofstream f(path, std::ios::binary);
  f << doc.dump(2) << '\n';
  if (!f) throw msvar::Error(msvar::ErrorCode::output, "cannot write " + path.string());
  pl::emit_probability_plot_data(fit.filter, fit.smoothed, periods, o.out, "regime_probabilities", !o.no_svg);

  const auto& m = fit.model;
  std::printf("%s  loglik %.6f  AIC %.6f  iterations %zu\n", spec.label().c_str(), fit.diagnostics.loglik,
              fit.diagnostics.aic, fit.diagnostics.iterations);
  for (std::size_t j = 0; j < spec.m; ++j) {
    std::printf("regime %zu  intercept", j + 1);
    for (double v : m.intercepts[j]) std::printf(" %.6f", v);
    std::printf("  transition");
    for (std::size_t i = 0; i < spec.m; ++i) std::printf(" %.6f", m.transition(j, i));
    std::printf("\n");
  }
  std::cerr << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_simulate(const Options& o) {
  for (const auto& p : pl::write_fixture(o.out, o.seed)) std::cout << "wrote " << p.string() << '\n';
  return 0;
}

int cmd_report(const Options& o) {
  std::ifstream f(o.results, std::ios::binary);
  if (!f) throw msvar::Error(msvar::ErrorCode::config, "cannot read " + o.results);
  pl::Json doc;
  try {
    doc = pl::Json::parse(f);
  } catch (const std::exception& e) {
    throw msvar::Error(msvar::ErrorCode::config, std::string("bad results document: ") + e.what());
  }
  if (doc.value("status", "") != "ok")
    throw msvar::Error(msvar::ErrorCode::config, "results document is incomplete (status != ok)");
  std::cout << pl::render_tables(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-switching VAR analysis of two monthly price series"};
  app.set_config("--config", "", "Key-value configuration file; flags override its keys");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  add_series(app, o.s1, "series1");
  add_series(app, o.s2, "series2");
  app.add_option("--cache-dir", o.cache_dir, "Download cache directory")->capture_default_str();
  app.add_option("--start", o.start, "First month (YYYY-MM)");
  app.add_option("--end", o.end, "Last month (YYYY-MM)");
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  app.add_option("--pmax", o.pmax, "Largest lag for VAR order selection")->capture_default_str();
  app.add_option("--regimes", o.regimes, "Regimes for the univariate and single fits")->capture_default_str();
  app.add_option("--lags", o.lags, "Lags for the univariate and single fits")->capture_default_str();
  app.add_flag("--switching-cov", o.switching_cov, "Regime-dependent covariance for those fits");
  app.add_flag("--refetch", o.refetch, "Ignore cached downloads");
  app.add_option("--tolerance", o.tolerance, "Relative log-likelihood tolerance")->capture_default_str();
  app.add_option("--max-iter", o.max_iter, "EM iteration cap")->capture_default_str();
  app.add_option("--restarts", o.restarts, "EM restarts per fit")->capture_default_str();
  app.add_option("--threads", o.threads, "Concurrent restarts")->capture_default_str();
  app.add_option("--candidates", o.candidates, "Bivariate candidates m:p:msi|msih, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  app.add_flag("--no-svg", o.no_svg, "Skip SVG renderings");

  auto* fetch = app.add_subcommand("fetch", "Download or read both series and report their hashes");
  auto* run = app.add_subcommand("run", "Full pipeline; writes report, results and plot data to --out");
  auto* fit = app.add_subcommand("fit", "Fit one MS-VAR specification to the returns");
  fit->add_flag("--univariate", o.univariate, "Use only the first series");
  auto* simulate = app.add_subcommand("simulate", "Write the synthetic fixture CSVs to --out");
  auto* report = app.add_subcommand("report", "Re-render the report from a results document");
  report->add_option("results", o.results, "results.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fetch) return cmd_fetch(o);
    if (*run) return cmd_run(o);
    if (*fit) return cmd_fit(o);
    if (*simulate) return cmd_simulate(o);
    if (*report) return cmd_report(o);
  } catch (const msvar::Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
