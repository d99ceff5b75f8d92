// Acceptance checks that need no external data. One PASS/FAIL line per criterion.

#include <armadillo>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "msvar/descriptive.hpp"
#include "msvar/em.hpp"
#include "msvar/fixture.hpp"
#include "msvar/hamilton.hpp"
#include "msvar/johansen.hpp"
#include "msvar/pipeline.hpp"
#include "msvar/unit_root.hpp"
#include "msvar/var.hpp"
#include "support/ms_oracle.hpp"

namespace fs = std::filesystem;
using namespace msvar;

namespace {

// Pinned tolerances.
constexpr double kJbLow = 585.0, kJbHigh = 592.0;
constexpr int kSizeReps = 1000;
constexpr std::size_t kUnitRootT = 500, kJohansenT = 1000;
constexpr double kSizeLow = 0.03, kSizeHigh = 0.07;
constexpr double kPowerMin = 0.95;
constexpr double kAicLag0 = 4.176391, kAicTol = 1e-4;
constexpr int kFilterInstances = 200;
constexpr double kFilterTol = 1e-9;
constexpr int kAscentFits = 50;
constexpr double kAscentTol = 1e-8, kLinearTol = 1e-6;
constexpr int kRecoveryReps = 20;
constexpr double kRecoveryRel = 0.10, kRecoveryShare = 0.90;
constexpr double kErgodicTol = 1e-10, kDurationTol = 0.01;

int failures = 0;

void report(const char* id, bool ok, const std::string& what, double seconds) {
  std::printf("%-4s %s  %s  (%.1fs)\n", id, ok ? "PASS" : "FAIL", what.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class F>
void criterion(const char* id, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string what;
  try {
    ok = body(what);
  } catch (const std::exception& e) {
    what += std::string(" threw: ") + e.what();
  }
  report(id, ok, what, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::mt19937_64 rep_rng(std::uint32_t stream, int rep) {
  std::seed_seq seq{stream, static_cast<std::uint32_t>(rep)};
  return std::mt19937_64(seq);
}

std::vector<double> random_walk(std::size_t T, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(T);
  double s = 0.0;
  for (auto& v : x) v = s += n(rng);
  return x;
}

std::vector<double> white_noise(std::size_t T, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(T);
  for (auto& v : x) v = n(rng);
  return x;
}

bool in_band(double x) { return x >= kSizeLow && x <= kSizeHigh; }

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

}  // namespace

int main() {
  criterion("C1", [](std::string& w) {
    const double jb = stats::jarque_bera(616, -1.05, 7.30).statistic;
    w = fmt("JB from reference moments (n=616, S=-1.05, K=7.30) = %.4f, band [%.0f, %.0f]", jb, kJbLow, kJbHigh);
    return jb >= kJbLow && jb <= kJbHigh;
  });

  criterion("C2", [](std::string& w) {
    int adf = 0, pp = 0, kpss = 0;
    for (int rep = 0; rep < kSizeReps; ++rep) {
      auto rng = rep_rng(2, rep);
      const auto rw = random_walk(kUnitRootT, rng);
      adf += unitroot::adf_test(rw, Deterministic::constant).reject_5;
      pp += unitroot::pp_test(rw, Deterministic::constant).reject_5;
      kpss += unitroot::kpss_test(white_noise(kUnitRootT, rng), Deterministic::constant).reject_5;
    }
    const double a = adf / double(kSizeReps), p = pp / double(kSizeReps), k = kpss / double(kSizeReps);
    w = fmt("5%% size over %d reps, T=%zu: ADF %.3f, PP %.3f (random walk); KPSS %.3f (white noise); band [%.2f, %.2f]",
            kSizeReps, kUnitRootT, a, p, k, kSizeLow, kSizeHigh);
    return in_band(a) && in_band(p) && in_band(k);
  });

  criterion("C3", [](std::string& w) {
    const double aic = var::aic(-1267.623, 2, 608);
    w = fmt("lag-0 AIC from LogL -1267.623, T=608, 2 parameters = %.6f vs %.6f (tol %.0e)", aic, kAicLag0, kAicTol);
    return std::abs(aic - kAicLag0) <= kAicTol;
  });

  criterion("C4", [](std::string& w) {
    int power = 0, size = 0, driftless = 0;
    std::normal_distribution<double> n(0.0, 1.0);
    for (int rep = 0; rep < kSizeReps; ++rep) {
      auto rng = rep_rng(4, rep);
      arma::mat co(kJohansenT, 2), ind(kJohansenT, 2), flat(kJohansenT, 2);
      double x = 0.0, a = 0.0, b = 0.0, c = 0.0, d = 0.0;
      for (std::size_t t = 0; t < kJohansenT; ++t) {
        x += n(rng);
        co(t, 0) = x;
        co(t, 1) = x + 0.5 * n(rng);
        a += 0.1 + n(rng);
        b += 0.1 + n(rng);
        ind(t, 0) = a;
        ind(t, 1) = b;
        flat(t, 0) = c += n(rng);
        flat(t, 1) = d += n(rng);
      }
      power += johansen::johansen_test(co, 2).ranks[0].trace_reject_5;
      size += johansen::johansen_test(ind, 2).ranks[0].trace_reject_5;
      driftless += johansen::johansen_test(flat, 2).ranks[0].trace_reject_5;
    }
    const double pw = power / double(kSizeReps), sz = size / double(kSizeReps);
    // The unrestricted-constant tables assume the constant produces a drift;
    // the driftless rate is printed for information and not judged.
    w = fmt("trace test r=0, p=2, T=%zu, %d reps: power %.3f (min %.2f), size %.3f on drifting independent walks "
            "(band [%.2f, %.2f]); driftless walks reject %.3f (informational)",
            kJohansenT, kSizeReps, pw, kPowerMin, sz, kSizeLow, kSizeHigh, driftless / double(kSizeReps));
    return pw >= kPowerMin && in_band(sz);
  });

  criterion("C5", [](std::string& w) {
    double worst_ll = 0.0, worst_sm = 0.0, worst_f = 0.0;
    for (int rep = 0; rep < kFilterInstances; ++rep) {
      auto rng = rep_rng(5, rep);
      const std::size_t p = 1 + rep % 2, n = 3 + rep % 8;
      const auto model = oracle::random_model(2, 1 + rep % 2, p, rep % 3 == 0, rng);
      const arma::mat y = ms::simulate(model, n + p, 7000 + rep).data;
      const auto f = ms::hamilton_filter(model, y);
      const auto s = ms::kim_smoother(f, model.transition);
      const auto e = oracle::enumerate(model, ms::log_densities(model, ms::build_design(y, p)));
      worst_ll = std::max(worst_ll, std::abs(f.loglik - e.loglik));
      worst_sm = std::max(worst_sm, arma::abs(s.smoothed - e.smoothed).max());
      worst_f = std::max(worst_f, arma::abs(f.filtered - e.filtered).max());
    }
    w = fmt("%d instances, m=2, T-p in 3..10: max |dlogL| %.2e, max |dsmoothed| %.2e, max |dfiltered| %.2e (tol %.0e)",
            kFilterInstances, worst_ll, worst_sm, worst_f, kFilterTol);
    return worst_ll <= kFilterTol && worst_sm <= kFilterTol && worst_f <= kFilterTol;
  });

  criterion("C6", [](std::string& w) {
    double worst = 0.0;
    std::size_t traces = 0;
    for (int rep = 0; rep < kAscentFits; ++rep) {
      auto rng = rep_rng(6, rep);
      const auto truth = oracle::random_model(2, 1 + rep % 2, 1 + rep % 2, rep % 2 == 0, rng);
      const arma::mat y = ms::simulate(truth, 300, 8000 + rep).data;
      ms::FitOptions o;
      o.restarts = 3;
      o.seed = 9000 + rep;
      try {
        const auto r = ms::fit(y, truth.spec, o);
        worst = std::min(worst, r.diagnostics.worst_step);
      } catch (const ms::NonConvergenceError& e) {
        if (e.best_so_far()) worst = std::min(worst, e.best_so_far()->diagnostics.worst_step);
      }
      traces += 3;
    }

    // EM started from identical regimes stays on the linear-VAR manifold.
    auto rng = rep_rng(6, 1000);
    const auto truth = oracle::random_model(2, 2, 2, false, rng);
    const arma::mat y = ms::simulate(truth, 400, 61).data;
    const auto v = var::fit_var(y, 2);
    ms::MsVarModel start;
    start.spec = {2, 2, 2, false};
    start.intercepts = {arma::vec(2, arma::fill::zeros), arma::vec(2, arma::fill::zeros)};
    start.ar = {arma::mat(2, 2, arma::fill::zeros), arma::mat(2, 2, arma::fill::zeros)};
    start.cov = {arma::mat(2, 2, arma::fill::eye), arma::mat(2, 2, arma::fill::eye)};
    start.transition = ms::TransitionMatrix(arma::mat{{0.8, 0.2}, {0.3, 0.7}});
    start.initial = ms::ergodic_distribution(start.transition);
    const auto c = ms::fit_from(start, y, {1e-12, 2000, 1, 0, 1});
    const double gap = std::abs(c.diagnostics.loglik - v.loglik);
    w = fmt("%d fits (%zu restart traces): most negative step %.2e (tol -%.0e); identical-regime EM logL %.6f vs "
            "linear VAR %.6f, gap %.2e (tol %.0e)",
            kAscentFits, traces, worst, kAscentTol, c.diagnostics.loglik, v.loglik, gap, kLinearTol);
    return worst >= -kAscentTol && gap <= kLinearTol;
  });

  criterion("C7", [](std::string& w) {
    ms::MsVarModel m;
    m.spec = {2, 1, 2, true};
    m.intercepts = {arma::vec{3.0, 2.0}, arma::vec{-2.0, -3.0}};
    m.ar = {arma::mat{{0.5, 0.4}, {-0.4, 0.5}}};
    m.cov = {arma::mat{{1.0, 0.8}, {0.8, 1.0}}, arma::mat{{2.0, 1.6}, {1.6, 2.0}}};
    m.transition = ms::TransitionMatrix(arma::mat{{0.7, 0.3}, {0.4, 0.6}});
    m.initial = {0.6, 0.4};
    int ok = 0;
    double worst = 0.0;
    for (int rep = 0; rep < kRecoveryReps; ++rep) {
      const auto sim = ms::simulate(m, 4000, 500 + rep);
      ms::FitOptions o;
      o.restarts = 3;
      const auto r = ms::fit(sim.data, m.spec, o);
      // Canonical order matches the truth's (descending first intercept). The
      // initial distribution is a single-draw quantity and is left out.
      const arma::vec full = ms::pack_parameters(m);
      const arma::vec tru = full.head(full.n_elem - 2);
      const arma::vec est = ms::pack_parameters(r.model).head(tru.n_elem);
      const arma::vec rel = arma::abs(est - tru) / arma::abs(tru);
      worst = std::max(worst, rel.max());
      ok += rel.max() <= kRecoveryRel;
    }
    const double share = ok / double(kRecoveryReps);
    w = fmt("MSIH(2)-VAR(1), k=2, T=4000: %d/%d replications with every parameter within %.0f%% (need %.0f%%); "
            "worst max relative error %.3f",
            ok, kRecoveryReps, 100 * kRecoveryRel, 100 * kRecoveryShare, worst);
    return share >= kRecoveryShare;
  });

  std::printf("C8   SKIP  needs the downloaded series; see acceptance_market_data\n");

  criterion("C9", [](std::string& w) {
    const fs::path dir = fs::temp_directory_path() / ("msvar_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    pipeline::write_fixture(dir / "data", 20211001);
    pipeline::PipelineConfig c;
    data::SeriesSource a, b;
    a.name = "TSX";
    a.source = (dir / "data" / "tsx.csv").string();
    b.name = "WTI";
    b.source = (dir / "data" / "wti.csv").string();
    c.dataset.series = {a, b};
    c.dataset.cache_dir = dir / "cache";
    c.candidates = pipeline::parse_candidates("2:1:msi,2:2:msi,2:1:msih,2:2:msih");
    c.out = dir / "out";
    pipeline::run_pipeline(c);
    const auto first = snapshot(c.out);
    fs::remove_all(c.out);
    pipeline::run_pipeline(c);
    const auto second = snapshot(c.out);
    std::size_t bytes = 0;
    for (const auto& [_, v] : first) bytes += v.size();
    fs::remove_all(dir);
    w = fmt("two fixture runs, same seed: %zu files, %zu bytes, %s", first.size(), bytes,
            first == second ? "identical" : "DIFFERENT");
    return first == second && !first.empty();
  });

  criterion("C10", [](std::string& w) {
    const ms::TransitionMatrix t8(arma::mat{{0.959781, 0.040219}, {0.167467, 0.832533}});
    const arma::vec d = ms::expected_duration(t8);
    ms::MsVarModel m;
    m.spec = {2, 1, 1, false};
    m.intercepts = {arma::vec{0.01}, arma::vec{-0.015}};
    m.ar = {arma::mat(1, 1, arma::fill::value(0.05))};
    m.cov = {arma::mat(1, 1, arma::fill::value(0.0016)), arma::mat(1, 1, arma::fill::value(0.0016))};
    m.transition = t8;
    m.initial = ms::ergodic_distribution(t8);
    const auto fit = ms::fit(ms::simulate(m, 616, 10).data, m.spec);
    const arma::mat& P = fit.model.transition.matrix();
    const arma::vec pi = ms::ergodic_distribution(fit.model.transition);
    const double resid = arma::abs(P.t() * pi - pi).max();
    w = fmt("fitted P: |pi'P - pi'| = %.2e (tol %.0e); durations from reference matrix %.4f, %.4f vs 24.86, 5.97 "
            "(tol %.2f)",
            resid, kErgodicTol, d(0), d(1), kDurationTol);
    return resid <= kErgodicTol && std::abs(d(0) - 24.86) <= kDurationTol && std::abs(d(1) - 5.97) <= kDurationTol;
  });

  std::printf("%s: %d criterion failure(s)\n", failures ? "FAILED" : "ALL PASS", failures);
  return failures ? 1 : 0;
}
