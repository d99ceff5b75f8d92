#include <catch2/catch_amalgamated.hpp>

#include <armadillo>
#include <cmath>
#include <random>

#include "msvar/unit_root.hpp"
#include "support/test_util.hpp"

using namespace msvar;
using namespace msvar::unitroot;
using Catch::Approx;
using testutil::code_of;

namespace {

std::vector<double> load(const char* path) {
  arma::vec v;
  REQUIRE(v.load(path, arma::raw_ascii));
  return arma::conv_to<std::vector<double>>::from(v);
}

std::vector<double> diff(const std::vector<double>& x) {
  std::vector<double> d(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) d[i - 1] = x[i] - x[i - 1];
  return d;
}

std::vector<double> walk(std::size_t T, std::mt19937_64& rng) {
  auto w = testutil::random_walk(T, 1, rng);
  return arma::conv_to<std::vector<double>>::from(w.col(0));
}

std::vector<double> noise(std::size_t T, std::mt19937_64& rng) {
  return arma::conv_to<std::vector<double>>::from(testutil::white_noise(T, rng));
}

}  // namespace

// Reference values from statsmodels adfuller / kpss on data/rw300.txt.
TEST_CASE("ADF matches an independent implementation") {
  const auto x = load("data/rw300.txt");
  const auto c3 = adf_test(x, Deterministic::constant, 3);
  CHECK(c3.lags == 3);
  CHECK(c3.statistic == Approx(0.23609619641457613).epsilon(1e-9));
  CHECK(*c3.p_value == Approx(0.9742149853098122).epsilon(1e-6));

  const auto ct0 = adf_test(x, Deterministic::constant_trend, 0);
  CHECK(ct0.statistic == Approx(-2.962447974793202).epsilon(1e-9));
  CHECK(*ct0.p_value == Approx(0.14288408806806563).epsilon(1e-6));

  const auto ac = adf_test(x, Deterministic::constant);
  CHECK(ac.lags == 8);
  CHECK(ac.statistic == Approx(0.33747825064125353).epsilon(1e-9));
  CHECK(*ac.p_value == Approx(0.9790001183656438).epsilon(1e-6));

  const auto act = adf_test(x, Deterministic::constant_trend);
  CHECK(act.lags == 2);
  CHECK(act.statistic == Approx(-2.0789733375680592).epsilon(1e-9));
  CHECK(*act.p_value == Approx(0.5578492670980992).epsilon(1e-6));

  const auto dx = diff(x);
  const auto dc = adf_test(dx, Deterministic::constant);
  CHECK(dc.lags == 7);
  CHECK(dc.statistic == Approx(-7.259370943468813).epsilon(1e-9));
  CHECK(dc.reject_5);
  const auto dct = adf_test(dx, Deterministic::constant_trend);
  CHECK(dct.statistic == Approx(-7.292250414528916).epsilon(1e-9));
}

TEST_CASE("KPSS matches an independent implementation") {
  const auto x = load("data/rw300.txt");
  CHECK(kpss_test(x, Deterministic::constant, 5).statistic == Approx(4.651573238495187).epsilon(1e-9));
  CHECK(kpss_test(x, Deterministic::constant_trend, 5).statistic == Approx(0.7340290988349688).epsilon(1e-9));
}

TEST_CASE("MacKinnon p-values") {
  CHECK(mackinnon_p(-3.303, Deterministic::constant_trend) == Approx(0.0658).margin(5e-4));
  CHECK(mackinnon_p(-3.132, Deterministic::constant_trend) == Approx(0.0988).margin(5e-4));
  CHECK(mackinnon_p(-2.769, Deterministic::constant_trend) == Approx(0.2086).margin(5e-4));
  CHECK(mackinnon_p(-22.3, Deterministic::constant) < 1e-6);
  CHECK(mackinnon_p(5.0, Deterministic::constant) == 1.0);
  double prev = 0.0;
  for (double tau = -10.0; tau <= 3.0; tau += 0.05) {
    const double p = mackinnon_p(tau, Deterministic::constant);
    REQUIRE(p >= prev - 1e-12);
    REQUIRE(p >= 0.0);
    REQUIRE(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("critical values are ordered") {
  for (auto det : {Deterministic::constant, Deterministic::constant_trend}) {
    const auto cv = mackinnon_critical(det, 500);
    CHECK(cv.pct1 < cv.pct5);
    CHECK(cv.pct5 < cv.pct10);
    const auto k = kpss_critical(det);
    CHECK(k.pct10 < k.pct5);
    CHECK(k.pct5 < k.pct1);
  }
  CHECK(kpss_critical(Deterministic::constant).pct10 == 0.347);
  CHECK(kpss_critical(Deterministic::constant).pct5 == 0.463);
  CHECK(kpss_critical(Deterministic::constant).pct1 == 0.739);
}

TEST_CASE("ADF with zero lags equals PP with bandwidth zero") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = rep % 2 ? walk(200, rng) : noise(200, rng);
    for (auto det : {Deterministic::constant, Deterministic::constant_trend}) {
      const double a = adf_test(x, det, 0).statistic;
      const double p = pp_test(x, det, 0).statistic;
      REQUIRE(a == Approx(p).epsilon(1e-10));
    }
  }
}

TEST_CASE("white noise: PP close to ADF") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = noise(500, rng);
    const double a = adf_test(x, Deterministic::constant, 0).statistic;
    const double p = pp_test(x, Deterministic::constant).statistic;
    CHECK(std::abs(a - p) < 0.1 * std::abs(a));
  }
}

TEST_CASE("tests are invariant to adding a constant") {
  std::mt19937_64 rng(6);
  const auto x = walk(300, rng);
  auto y = x;
  for (auto& v : y) v += 123.0;
  const auto det = Deterministic::constant;
  CHECK(adf_test(y, det).statistic == Approx(adf_test(x, det).statistic).epsilon(1e-8));
  CHECK(pp_test(y, det).statistic == Approx(pp_test(x, det).statistic).epsilon(1e-8));
  CHECK(kpss_test(y, det).statistic == Approx(kpss_test(x, det).statistic).epsilon(1e-8));
}

TEST_CASE("KPSS is non-negative") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = rep % 2 ? walk(100, rng) : noise(100, rng);
    REQUIRE(kpss_test(x, Deterministic::constant).statistic >= 0.0);
    REQUIRE(kpss_test(x, Deterministic::constant_trend).statistic >= 0.0);
    REQUIRE_FALSE(kpss_test(x, Deterministic::constant).p_value.has_value());
  }
}

TEST_CASE("unit-root error paths") {
  const std::vector<double> flat(100, 3.0);
  CHECK(code_of([&] { adf_test(flat, Deterministic::constant); }) == ErrorCode::degenerate_input);
  CHECK(code_of([&] { pp_test(flat, Deterministic::constant); }) == ErrorCode::degenerate_input);
  CHECK(code_of([&] { kpss_test(flat, Deterministic::constant); }) == ErrorCode::degenerate_input);
  const std::vector<double> short_x{1, 2, 4, 3, 5, 7, 6, 8, 9, 11, 10, 12};
  CHECK(code_of([&] { adf_test(short_x, Deterministic::constant, 5); }) == ErrorCode::insufficient_data);
  CHECK(code_of([&] { pp_test(short_x, Deterministic::constant); }) == ErrorCode::insufficient_data);
  CHECK(code_of([&] { kpss_test(short_x, Deterministic::constant); }) == ErrorCode::insufficient_data);
  std::mt19937_64 rng(1);
  const auto x = noise(100, rng);
  CHECK(code_of([&] { adf_test(x, Deterministic::constant, -1); }) == ErrorCode::domain);
}

TEST_CASE("white noise is rejected almost always") {
  std::mt19937_64 rng(77);
  int adf = 0, pp = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto x = noise(500, rng);
    adf += adf_test(x, Deterministic::constant).reject_5;
    pp += pp_test(x, Deterministic::constant).reject_5;
  }
  CHECK(adf >= 198);
  CHECK(pp >= 198);
}
