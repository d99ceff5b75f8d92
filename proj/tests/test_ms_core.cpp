#include <catch2/catch_amalgamated.hpp>

#include <armadillo>
#include <cmath>
#include <numbers>
#include <random>

#include "msvar/em.hpp"
#include "msvar/hamilton.hpp"
#include "msvar/ms_model.hpp"
#include "msvar/var.hpp"
#include "support/ms_oracle.hpp"
#include "support/test_util.hpp"

using namespace msvar;
using namespace msvar::ms;
using Catch::Approx;
using testutil::code_of;

namespace {

MsVarModel two_regime_ar1() {
  MsVarModel m;
  m.spec = {2, 1, 1, true};
  m.intercepts = {arma::vec{1.0}, arma::vec{-1.0}};
  m.ar = {arma::mat(1, 1, arma::fill::value(0.3))};
  m.cov = {arma::mat(1, 1, arma::fill::value(0.25)), arma::mat(1, 1, arma::fill::value(0.5))};
  m.transition = TransitionMatrix(arma::mat{{0.9, 0.1}, {0.2, 0.8}});
  m.initial = {0.5, 0.5};
  return m;
}

}  // namespace

TEST_CASE("spec labels and validation") {
  CHECK(MsVarSpec{2, 2, 2, false}.label() == "MSI(2)-VAR(2)");
  CHECK(MsVarSpec{3, 1, 1, true}.label() == "MSIH(3)-VAR(1)");
  CHECK(code_of([] { MsVarSpec{1, 1, 1, false}.validate(); }) == ErrorCode::domain);
  CHECK_NOTHROW(MsVarSpec{1, 1, 1, false}.validate(true));
  CHECK(code_of([] { MsVarSpec{2, 1, 0, false}.validate(); }) == ErrorCode::domain);
}

TEST_CASE("transition matrix validation") {
  CHECK(code_of([] { TransitionMatrix(arma::mat{{0.9, 0.2}, {0.5, 0.5}}); }) == ErrorCode::domain);
  CHECK(code_of([] { TransitionMatrix(arma::mat{{1.1, -0.1}, {0.5, 0.5}}); }) == ErrorCode::domain);
  CHECK(code_of([] { TransitionMatrix(arma::mat(2, 3, arma::fill::value(1.0 / 3))); }) == ErrorCode::domain);
  CHECK_NOTHROW(TransitionMatrix(arma::mat{{0.9, 0.1}, {0.2, 0.8}}));
  const auto u = TransitionMatrix::uniform(3);
  CHECK(u(1, 2) == Approx(1.0 / 3));
  const auto p = TransitionMatrix::persistent(3, 0.9);
  CHECK(p(0, 0) == 0.9);
  CHECK(p(0, 1) == Approx(0.05));
}

TEST_CASE("conditional densities") {
  MsVarModel m;
  m.spec = {1, 0, 1, false};
  m.intercepts = {arma::vec{0.0}};
  m.cov = {arma::mat(1, 1, arma::fill::ones)};
  m.transition = TransitionMatrix(arma::mat(1, 1, arma::fill::ones));
  m.initial = {1.0};
  const arma::vec d0 = regime_conditional_density(m, arma::vec{0.0}, arma::mat(1, 0));
  CHECK(d0(0) == Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));

  MsVarModel a;
  a.spec = {2, 1, 1, false};
  a.intercepts = {arma::vec{0.5}, arma::vec{0.5}};
  a.ar = {arma::mat(1, 1, arma::fill::value(0.2))};
  a.cov = {arma::mat(1, 1, arma::fill::value(0.04)), arma::mat(1, 1, arma::fill::value(0.04))};
  a.transition = TransitionMatrix::uniform(2);
  a.initial = {0.5, 0.5};
  const arma::vec d = regime_conditional_density(a, arma::vec{0.7}, arma::mat(1, 1, arma::fill::ones));
  CHECK(d(0) == Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * 0.04)).epsilon(1e-14));
  CHECK(d(0) == d(1));
}

TEST_CASE("log densities match a direct multivariate normal evaluation") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto model = oracle::random_model(2, 2, 3, rep % 2 == 0, rng);
    const arma::mat y = simulate(model, 12, 100 + rep).data;
    const auto d = build_design(y, model.spec.p);
    const arma::mat ld = log_densities(model, d);
    for (std::size_t t = 0; t < d.Y.n_rows; ++t)
      for (std::size_t j = 0; j < 2; ++j)
        REQUIRE(ld(t, j) == Approx(oracle::log_normal(model, d, t, j)).epsilon(1e-11));
  }
}

TEST_CASE("filter and smoother agree with path enumeration") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t m = rep % 4 == 0 ? 3 : 2;
    const std::size_t n = m == 3 ? 6 : 3 + rep % 9;
    const auto model = oracle::random_model(m, 1 + rep % 2, 1 + rep % 2, rep % 3 == 0, rng);
    const arma::mat y = simulate(model, n + model.spec.p, 500 + rep).data;
    const auto f = hamilton_filter(model, y);
    const auto s = kim_smoother(f, model.transition);
    const auto ld = log_densities(model, build_design(y, model.spec.p));
    const auto e = oracle::enumerate(model, ld);
    REQUIRE(f.loglik == Approx(e.loglik).epsilon(1e-12));
    REQUIRE(arma::abs(f.filtered - e.filtered).max() < 1e-9);
    REQUIRE(arma::abs(s.smoothed - e.smoothed).max() < 1e-9);
    for (std::size_t t = 0; t + 1 < n; ++t)
      REQUIRE(arma::abs(s.pairwise.slice(t) - e.pairwise.slice(t)).max() < 1e-9);
    REQUIRE(arma::abs(s.smoothed.row(n - 1) - f.filtered.row(n - 1)).max() == 0.0);
  }
}

TEST_CASE("probability rows sum to one") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto model = oracle::random_model(2 + rep % 2, 2, 1, rep % 2 == 1, rng);
    const arma::mat y = simulate(model, 300, rep).data;
    const auto f = hamilton_filter(model, y);
    const auto s = kim_smoother(f, model.transition);
    for (const arma::mat* M : {&f.predicted, &f.filtered, &s.smoothed})
      REQUIRE(arma::abs(arma::sum(*M, 1) - 1.0).max() < 1e-10);
    for (std::size_t t = 0; t < s.pairwise.n_slices; ++t) {
      REQUIRE(arma::abs(arma::sum(s.pairwise.slice(t), 1).t() - s.smoothed.row(t)).max() < 1e-10);
      REQUIRE(arma::abs(arma::sum(s.pairwise.slice(t), 0) - s.smoothed.row(t + 1)).max() < 1e-10);
    }
  }
}

TEST_CASE("identical regimes reproduce the linear VAR") {
  std::mt19937_64 rng(9);
  const arma::mat y = arma::diff(testutil::random_walk(300, 2, rng, 0.1));
  const auto v = var::fit_var(y, 2);
  MsVarModel m;
  m.spec = {2, 2, 2, false};
  m.intercepts = {v.intercept, v.intercept};
  m.ar = v.coefs;
  m.cov = {v.sigma, v.sigma};
  m.transition = TransitionMatrix::uniform(2);
  m.initial = {0.5, 0.5};
  const auto f = hamilton_filter(m, y);
  CHECK(f.loglik == Approx(v.loglik).epsilon(1e-12));
  const auto s = kim_smoother(f, m.transition);
  CHECK(arma::abs(f.filtered - 0.5).max() < 1e-12);
  CHECK(arma::abs(s.smoothed - 0.5).max() < 1e-12);

  m.transition = TransitionMatrix(arma::mat{{0.95, 0.05}, {0.3, 0.7}});
  m.initial = ergodic_distribution(m.transition);
  const auto step = em_step(m, y);
  CHECK(step.loglik == Approx(v.loglik).epsilon(1e-12));
  CHECK(std::abs(hamilton_filter(step.model, y).loglik - v.loglik) < 1e-6);
}

TEST_CASE("absorbing first regime reproduces its own likelihood") {
  auto m = two_regime_ar1();
  m.transition = TransitionMatrix(arma::mat{{1.0, 0.0}, {0.0, 1.0}});
  m.initial = {1.0, 0.0};
  const arma::mat y = simulate(two_regime_ar1(), 80, 4).data;
  const auto ld = log_densities(m, build_design(y, 1));
  CHECK(hamilton_filter(m, y).loglik == Approx(arma::accu(ld.col(0))).epsilon(1e-13));
}

TEST_CASE("filter reports the failing period") {
  const auto m = two_regime_ar1();
  arma::mat ld(5, 2, arma::fill::zeros);
  ld.row(3).fill(-arma::datum::inf);
  try {
    filter_log_densities(m, ld);
    FAIL("expected a filter error");
  } catch (const FilterError& e) {
    CHECK(e.code() == ErrorCode::filter);
    CHECK(e.period() == 3);
  }
}

TEST_CASE("relabelling leaves the likelihood unchanged") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const auto model = oracle::random_model(3, 2, 1, true, rng);
    const arma::mat y = simulate(model, 150, rep).data;
    const double base = hamilton_filter(model, y).loglik;
    for (const auto& perm : std::vector<std::vector<std::size_t>>{{1, 0, 2}, {2, 0, 1}, {2, 1, 0}}) {
      const auto p = permute_regimes(model, perm);
      REQUIRE(hamilton_filter(p, y).loglik == Approx(base).epsilon(1e-12));
      REQUIRE(p.intercepts[0](0) == model.intercepts[perm[0]](0));
      REQUIRE(p.transition(0, 1) == model.transition(perm[0], perm[1]));
    }
    const auto c = canonicalize(model);
    REQUIRE(c.intercepts[0](0) >= c.intercepts[1](0));
    REQUIRE(c.intercepts[1](0) >= c.intercepts[2](0));
    REQUIRE(hamilton_filter(c, y).loglik == Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("ergodic distribution") {
  const arma::vec u = ergodic_distribution(TransitionMatrix::uniform(2));
  CHECK(u(0) == Approx(0.5));
  const TransitionMatrix t8(arma::mat{{0.959781, 0.040219}, {0.167467, 0.832533}});
  const arma::vec pi = ergodic_distribution(t8);
  CHECK(pi(0) == Approx(0.167467 / (0.040219 + 0.167467)).epsilon(1e-12));
  CHECK(pi(0) == Approx(0.8063).margin(1e-4));
  CHECK(pi(1) == Approx(0.1937).margin(1e-4));
  CHECK(code_of([] { ergodic_distribution(TransitionMatrix(arma::eye(2, 2))); }) == ErrorCode::ergodicity);
  CHECK(code_of([] { ergodic_distribution(TransitionMatrix(arma::mat{{0.0, 1.0}, {1.0, 0.0}})); }) ==
        ErrorCode::ergodicity);

  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto P = oracle::random_transition(2 + rep % 4, rng);
    const arma::vec p = ergodic_distribution(P);
    REQUIRE(arma::abs(P.matrix().t() * p - p).max() < 1e-10);
    REQUIRE(std::abs(arma::accu(p) - 1.0) < 1e-12);
    REQUIRE(p.min() > 0.0);
  }
}

TEST_CASE("expected durations") {
  CHECK(expected_duration(TransitionMatrix::uniform(2))(0) == Approx(2.0));
  const arma::vec d = expected_duration(TransitionMatrix(arma::mat{{0.959781, 0.040219}, {0.167467, 0.832533}}));
  CHECK(d(0) == Approx(24.86).margin(0.01));
  CHECK(d(1) == Approx(5.97).margin(0.01));
  CHECK(code_of([] { expected_duration(TransitionMatrix(arma::mat{{1.0, 0.0}, {0.5, 0.5}})); }) ==
        ErrorCode::infinite_duration);
}

TEST_CASE("classification takes the argmax with ties to the lower regime") {
  SmoothedOutput s;
  s.smoothed = arma::mat{{0.9, 0.1}, {0.5, 0.5}, {0.2, 0.8}};
  CHECK(classify_regimes(s) == std::vector<std::size_t>{0, 0, 1});
}

TEST_CASE("classification recovers well separated regimes") {
  auto m = two_regime_ar1();
  m.intercepts = {arma::vec{3.0}, arma::vec{-3.0}};
  const auto sim = simulate(m, 1000, 77);
  const auto labels = classify_regimes(kim_smoother(hamilton_filter(m, sim.data), m.transition));
  std::size_t agree = 0;
  for (std::size_t t = 0; t < labels.size(); ++t) agree += labels[t] == sim.regimes[t + 1];
  CHECK(static_cast<double>(agree) >= 0.95 * static_cast<double>(labels.size()));
}

TEST_CASE("parameter count and AIC") {
  CHECK(parameter_count({2, 2, 2, false}) == 4 + 8 + 3 + 2);
  CHECK(parameter_count({2, 2, 2, true}) == 4 + 8 + 6 + 2);
  CHECK(parameter_count({2, 2, 1, false}) == 2 + 2 + 1 + 2);
  CHECK(parameter_count({3, 1, 2, true}) == 6 + 4 + 9 + 6);
  const auto m = two_regime_ar1();
  CHECK(model_aic(m, -100.0, 50) == Approx((200.0 + 2.0 * 7) / 50.0));

  // The single-regime harness also counts the k(k+1)/2 covariance terms, which
  // the linear-VAR criteria leave out; the two differ by exactly that penalty.
  std::mt19937_64 rng(4);
  const arma::mat y = arma::diff(testutil::random_walk(200, 2, rng));
  const auto v = var::fit_var(y, 1);
  MsVarModel one;
  one.spec = {1, 1, 2, false};
  one.intercepts = {v.intercept};
  one.ar = v.coefs;
  one.cov = {v.sigma};
  one.transition = TransitionMatrix(arma::mat(1, 1, arma::fill::ones));
  one.initial = {1.0};
  const double diff = model_aic(one, v.loglik, v.T) - var::information_criteria(v).aic;
  CHECK(diff == Approx(2.0 * 3.0 / static_cast<double>(v.T)).epsilon(1e-10));
}

TEST_CASE("simulation is reproducible and follows the chain") {
  const auto m = two_regime_ar1();
  const auto a = simulate(m, 200, 42), b = simulate(m, 200, 42);
  CHECK(arma::approx_equal(a.data, b.data, "absdiff", 0.0));
  CHECK(a.regimes == b.regimes);
  CHECK_FALSE(arma::approx_equal(a.data, simulate(m, 200, 43).data, "absdiff", 0.0));

  const auto big = simulate(m, 100000, 7);
  arma::mat counts(2, 2, arma::fill::zeros);
  for (std::size_t t = 1; t < big.regimes.size(); ++t) counts(big.regimes[t - 1], big.regimes[t]) += 1.0;
  const arma::mat freq = counts.each_col() / arma::sum(counts, 1);
  CHECK(arma::abs(freq - m.transition.matrix()).max() < 0.01);
}

TEST_CASE("noiseless simulation returns the intercepts") {
  MsVarModel m;
  m.spec = {2, 0, 2, true};
  m.intercepts = {arma::vec{1.5, -2.0}, arma::vec{-0.5, 4.0}};
  m.cov = {arma::mat(2, 2, arma::fill::zeros), arma::mat(2, 2, arma::fill::zeros)};
  m.transition = TransitionMatrix(arma::mat{{0.7, 0.3}, {0.4, 0.6}});
  m.initial = {0.5, 0.5};
  const auto sim = simulate(m, 50, 3);
  for (std::size_t t = 0; t < 50; ++t)
    REQUIRE(arma::approx_equal(sim.data.row(t).t(), m.intercepts[sim.regimes[t]], "absdiff", 0.0));
}

TEST_CASE("single-regime EM step reproduces least squares") {
  std::mt19937_64 rng(6);
  const arma::mat y = arma::diff(testutil::random_walk(250, 2, rng, 0.2));
  const auto v = var::fit_var(y, 2);
  MsVarModel start;
  start.spec = {1, 2, 2, false};
  start.intercepts = {arma::vec{0.0, 0.0}};
  start.ar = {arma::mat(2, 2, arma::fill::zeros), arma::mat(2, 2, arma::fill::zeros)};
  start.cov = {arma::mat(2, 2, arma::fill::eye)};
  start.transition = TransitionMatrix(arma::mat(1, 1, arma::fill::ones));
  start.initial = {1.0};
  const auto step = em_step(start, y);
  CHECK(arma::abs(step.model.intercepts[0] - v.intercept).max() < 1e-10);
  CHECK(arma::abs(step.model.ar[0] - v.coefs[0]).max() < 1e-10);
  CHECK(arma::abs(step.model.ar[1] - v.coefs[1]).max() < 1e-10);
  CHECK(arma::abs(step.model.cov[0] - v.sigma).max() < 1e-10);
}

TEST_CASE("EM never lowers the likelihood") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    const bool sw = rep % 2 == 0;
    const auto truth = oracle::random_model(2, 1 + rep % 2, 1 + rep % 2, sw, rng);
    const arma::mat y = simulate(truth, 200, 900 + rep).data;
    const auto start = initial_model(y, truth.spec, 40 + rep, rep);
    const auto res = fit_from(start, y, {1e-10, 60, 1, 0, 1});
    REQUIRE(res.diagnostics.worst_step >= -1e-8);
    for (std::size_t i = 1; i < res.diagnostics.loglik_trace.size(); ++i)
      REQUIRE(res.diagnostics.loglik_trace[i] >= res.diagnostics.loglik_trace[i - 1] - 1e-8);
  }
}

TEST_CASE("EM at a stationary point stays put") {
  auto truth = two_regime_ar1();
  truth.intercepts = {arma::vec{2.0}, arma::vec{-2.0}};
  const arma::mat y = simulate(truth, 400, 8).data;
  const auto res = fit_from(truth, y, {1e-15, 20000, 1, 0, 1});
  const auto step = em_step(res.model, y);
  const double next = hamilton_filter(step.model, y).loglik;
  CHECK(std::abs(next - step.loglik) < 1e-10);
}

TEST_CASE("a regime without support collapses") {
  auto m = two_regime_ar1();
  m.intercepts[1] = arma::vec{500.0};
  const arma::mat y = simulate(two_regime_ar1(), 100, 1).data;
  m.transition = TransitionMatrix(arma::mat{{0.99, 0.01}, {0.5, 0.5}});
  m.initial = {1.0, 0.0};
  CHECK(code_of([&] { em_step(m, y); }) == ErrorCode::regime_collapse);
}

TEST_CASE("fit reports non-convergence with the best run attached") {
  const arma::mat y = simulate(two_regime_ar1(), 300, 2).data;
  FitOptions opts;
  opts.max_iter = 1;
  opts.restarts = 2;
  try {
    fit(y, {2, 1, 1, false}, opts);
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.code() == ErrorCode::non_convergence);
    REQUIRE(e.best_so_far().has_value());
    CHECK_FALSE(e.best_so_far()->diagnostics.converged);
  }
}

TEST_CASE("fit is deterministic, canonical and thread independent") {
  auto truth = two_regime_ar1();
  truth.intercepts = {arma::vec{1.5}, arma::vec{-1.5}};
  const arma::mat y = simulate(truth, 400, 12).data;
  FitOptions opts;
  opts.restarts = 4;
  const auto a = fit(y, {2, 1, 1, true}, opts);
  opts.threads = 3;
  const auto b = fit(y, {2, 1, 1, true}, opts);
  CHECK(a.diagnostics.converged);
  CHECK(a.diagnostics.loglik == b.diagnostics.loglik);
  CHECK(arma::approx_equal(pack_parameters(a.model), pack_parameters(b.model), "absdiff", 0.0));
  CHECK(a.model.intercepts[0](0) > a.model.intercepts[1](0));
  CHECK(a.diagnostics.restarts_used == 4);
  CHECK(a.model.intercepts[0](0) == Approx(1.5).margin(0.3));
  CHECK(a.model.transition(0, 0) == Approx(0.9).margin(0.06));
  CHECK(a.filter.filtered.n_rows == 399);
  CHECK(a.diagnostics.aic == Approx(model_aic(a.model, a.diagnostics.loglik, 399)));
}

TEST_CASE("AIC prefers the true lag order in most replications") {
  MsVarModel truth;
  truth.spec = {2, 2, 1, false};
  truth.intercepts = {arma::vec{1.0}, arma::vec{-1.0}};
  truth.ar = {arma::mat(1, 1, arma::fill::value(0.1)), arma::mat(1, 1, arma::fill::value(0.4))};
  truth.cov = {arma::mat(1, 1, arma::fill::value(0.25)), arma::mat(1, 1, arma::fill::value(0.25))};
  truth.transition = TransitionMatrix(arma::mat{{0.9, 0.1}, {0.15, 0.85}});
  truth.initial = ergodic_distribution(truth.transition);
  FitOptions opts;
  opts.restarts = 3;
  int wins = 0;
  for (int rep = 0; rep < 7; ++rep) {
    const arma::mat y = simulate(truth, 400, 300 + rep).data;
    const arma::mat y1 = y.rows(1, y.n_rows - 1);  // same effective sample for both
    const auto two = fit(y, {2, 2, 1, false}, opts);
    const auto one = fit(y1, {2, 1, 1, false}, opts);
    wins += two.diagnostics.aic < one.diagnostics.aic;
  }
  CHECK(wins >= 4);
}
