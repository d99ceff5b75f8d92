#pragma once

#include <armadillo>
#include <optional>
#include <vector>

namespace msvar::var {

// Y_t = a + A_1 Y_{t-1} + ... + A_p Y_{t-p} + e_t, estimated by least squares.
struct VarModel {
  std::size_t k = 0;
  std::size_t p = 0;
  arma::vec intercept;
  std::vector<arma::mat> coefs;  // A_1..A_p, each k x k
  arma::mat sigma;               // residual cross-product / T
  std::size_t T = 0;             // effective sample size
  std::size_t sample_start = 0;  // first row of data used as a dependent observation
  double loglik = 0.0;           // +inf when sigma is singular
  bool degenerate = false;       // sigma singular (exact fit)
  arma::mat resid;               // T x k
  arma::mat regressors;          // T x (1 + k p): [1, y_{t-1}', ..., y_{t-p}']
};

// Rows of `data` are time, columns are variables. Dependent observations run
// from `sample_start` (default p) to the last row; a later start lets several
// lag orders share one sample.
VarModel fit_var(const arma::mat& data, std::size_t p,
                 std::optional<std::size_t> sample_start = std::nullopt);

struct InformationCriteria {
  double aic;
  double sc;
  double hq;
  double fpe;
};

InformationCriteria information_criteria(const VarModel& m);

// Per-observation criteria from a log-likelihood and a parameter count.
double aic(double loglik, double n_params, double T);
double sc(double loglik, double n_params, double T);
double hq(double loglik, double n_params, double T);

struct LrTest {
  double statistic;
  int df;
  double p_value;
  bool significant;  // at 5%
};

// Modified (small-sample corrected) LR test of lag p-1 against lag p.
LrTest sequential_lr(const VarModel& restricted, const VarModel& unrestricted);

struct LagRow {
  std::size_t lag;
  double loglik;
  std::optional<LrTest> lr;  // absent for lag 0
  double fpe;
  double aic;
  double sc;
  double hq;
};

struct LagSelectionTable {
  std::size_t pmax = 0;
  std::size_t T = 0;
  std::vector<LagRow> rows;
  std::size_t lr_lag = 0;
  std::size_t fpe_lag = 0;
  std::size_t aic_lag = 0;
  std::size_t sc_lag = 0;
  std::size_t hq_lag = 0;
};

LagSelectionTable select_lag(const arma::mat& data, std::size_t pmax);

double chi2_sf(double x, double df);

}  // namespace msvar::var
