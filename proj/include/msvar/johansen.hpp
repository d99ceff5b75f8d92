#pragma once

#include <armadillo>
#include <optional>
#include <vector>

#include "msvar/common.hpp"

namespace msvar::johansen {

struct RankTest {
  std::size_t r = 0;  // null hypothesis: rank <= r
  double trace = 0.0;
  double max_eig = 0.0;
  CriticalValues trace_cv{};  // standard table, keyed by (k - r, deterministic spec)
  CriticalValues max_eig_cv{};
  bool trace_reject_5 = false;
  bool max_eig_reject_5 = false;
  // Reference values for k = 2; reported, never used for decisions.
  std::optional<CriticalValues> reference_trace_cv;
  std::optional<CriticalValues> reference_max_eig_cv;
};

struct JohansenResult {
  std::vector<double> eigenvalues;  // descending, in [0, 1)
  std::vector<RankTest> ranks;      // r = 0..k-1
  std::size_t lags = 0;             // VAR order in levels; k-1 lagged differences
  Deterministic det = Deterministic::constant;
  std::size_t nobs = 0;
  std::size_t trace_rank_5 = 0;    // first r not rejected by the trace test
  std::size_t max_eig_rank_5 = 0;  // first r not rejected by the max-eigenvalue test
};

// Reduced-rank test on a VAR(p) in levels (rows = time). The deterministic
// terms enter the short-run regression unrestricted.
JohansenResult johansen_test(const arma::mat& levels, std::size_t p,
                             Deterministic det = Deterministic::constant);

// Osterwald-Lenum / MacKinnon-Haug-Michelis critical values, 1 <= k - r <= 5.
CriticalValues trace_critical(std::size_t k_minus_r, Deterministic det);
CriticalValues max_eig_critical(std::size_t k_minus_r, Deterministic det);

}  // namespace msvar::johansen
