#pragma once

#include <optional>
#include <span>
#include <string>

#include "msvar/common.hpp"

namespace msvar::unitroot {

struct UnitRootResult {
  std::string test;  // "ADF", "PP" or "KPSS"
  double statistic = 0.0;
  std::optional<double> p_value;  // absent for KPSS
  int lags = 0;                   // ADF augmentation lags, or PP/KPSS bandwidth
  Deterministic det = Deterministic::constant;
  CriticalValues critical{};
  std::size_t nobs = 0;  // observations in the test regression
  // ADF/PP: unit root rejected. KPSS: stationarity rejected.
  bool reject_5 = false;
  bool reject_10 = false;
};

// Lag/bandwidth argument: nullopt selects the automatic rule.
using LagChoice = std::optional<int>;

// Augmented Dickey-Fuller t-test. Automatic lags minimise AIC over
// 0..floor(12 (T/100)^{1/4}) on a common sample; the chosen lag is then
// re-estimated on the longest available sample.
UnitRootResult adf_test(std::span<const double> x, Deterministic det,
                        LagChoice max_lags = std::nullopt);

// Phillips-Perron Z_t with a Bartlett-kernel long-run variance.
// Automatic bandwidth floor(4 (T/100)^{2/9}).
UnitRootResult pp_test(std::span<const double> x, Deterministic det,
                       LagChoice bandwidth = std::nullopt);

// KPSS LM statistic. Automatic bandwidth follows the Newey-West (1994)
// plug-in rule for the Bartlett kernel.
UnitRootResult kpss_test(std::span<const double> x, Deterministic det,
                         LagChoice bandwidth = std::nullopt);

// MacKinnon (1994) response-surface p-value for the single-series
// Dickey-Fuller tau statistic.
double mackinnon_p(double tau, Deterministic det);

// MacKinnon (2010) finite-sample critical values.
CriticalValues mackinnon_critical(Deterministic det, std::size_t nobs);

CriticalValues kpss_critical(Deterministic det);

// Bartlett-weighted long-run variance with divisor n, weights 1 - j/(l+1).
double bartlett_lrv(std::span<const double> e, int bandwidth);

}  // namespace msvar::unitroot
