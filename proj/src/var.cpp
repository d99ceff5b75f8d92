#include "msvar/var.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "msvar/error.hpp"
#include "msvar/ols.hpp"

namespace msvar::var {

double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

VarModel fit_var(const arma::mat& data, std::size_t p, std::optional<std::size_t> sample_start) {
  const std::size_t T_full = data.n_rows;
  const std::size_t k = data.n_cols;
  const std::size_t start = sample_start.value_or(p);
  if (k == 0) throw Error(ErrorCode::insufficient_data, "fit_var: no variables");
  if (start < p) throw Error(ErrorCode::domain, "fit_var: sample starts before p lags are available");
  if (T_full <= start || T_full - start <= k * p + 1)
    throw Error(ErrorCode::insufficient_data, "fit_var: too few observations for the lag order");
  for (std::size_t j = 0; j < k; ++j) {
    const arma::vec col = data.col(j);
    if (col.max() - col.min() <= 1e-14 * std::max(std::abs(col.max()), std::abs(col.min())))
      throw Error(ErrorCode::degenerate_input, "fit_var: zero-variance column " + std::to_string(j));
  }

  const std::size_t T = T_full - start;
  arma::mat X(T, 1 + k * p);
  X.col(0).ones();
  for (std::size_t i = 1; i <= p; ++i)
    X.cols(1 + (i - 1) * k, i * k) = data.rows(start - i, T_full - 1 - i);
  const arma::mat Y = data.rows(start, T_full - 1);

  const OlsFit fit = ols(X, Y);  // throws rank_deficiency

  VarModel m;
  m.k = k;
  m.p = p;
  m.T = T;
  m.sample_start = start;
  m.intercept = fit.beta.row(0).t();
  for (std::size_t i = 0; i < p; ++i)
    m.coefs.push_back(fit.beta.rows(1 + i * k, (i + 1) * k).t());
  m.resid = fit.resid;
  m.regressors = X;
  m.sigma = (fit.resid.t() * fit.resid) / static_cast<double>(T);
  m.sigma = 0.5 * (m.sigma + m.sigma.t());

  const double ld = log_det_spd(m.sigma);
  const double dk = static_cast<double>(k);
  // Residual variation at rounding level relative to the data counts as an exact fit.
  const arma::vec sd_y = arma::stddev(Y, 1).t();
  const arma::vec rel = arma::eig_sym(m.sigma / (sd_y * sd_y.t()));
  if (!std::isfinite(ld) || rel.min() < 1e-14) {
    m.degenerate = true;
    m.loglik = std::numeric_limits<double>::infinity();
  } else {
    m.loglik = -0.5 * static_cast<double>(T) * (dk * std::log(2.0 * std::numbers::pi) + ld + dk);
  }
  return m;
}

double aic(double loglik, double n_params, double T) { return (-2.0 * loglik + 2.0 * n_params) / T; }
double sc(double loglik, double n_params, double T) {
  return (-2.0 * loglik + n_params * std::log(T)) / T;
}
double hq(double loglik, double n_params, double T) {
  return (-2.0 * loglik + 2.0 * n_params * std::log(std::log(T))) / T;
}

InformationCriteria information_criteria(const VarModel& m) {
  const double k = static_cast<double>(m.k);
  const double q = 1.0 + k * static_cast<double>(m.p);
  const double n = k * q;
  const double T = static_cast<double>(m.T);
  InformationCriteria ic;
  ic.aic = aic(m.loglik, n, T);
  ic.sc = sc(m.loglik, n, T);
  ic.hq = hq(m.loglik, n, T);
  ic.fpe = arma::det(m.sigma) * std::pow((T + q) / (T - q), k);
  return ic;
}

LrTest sequential_lr(const VarModel& restricted, const VarModel& unrestricted) {
  if (restricted.k != unrestricted.k || restricted.T != unrestricted.T ||
      restricted.sample_start != unrestricted.sample_start)
    throw Error(ErrorCode::comparison, "sequential_lr: models use different samples");
  const double k = static_cast<double>(unrestricted.k);
  const double q = 1.0 + k * static_cast<double>(unrestricted.p);
  const double ld_r = log_det_spd(restricted.sigma);
  const double ld_u = log_det_spd(unrestricted.sigma);
  LrTest t;
  t.statistic = (static_cast<double>(unrestricted.T) - q) * (ld_r - ld_u);
  t.df = static_cast<int>(unrestricted.k * unrestricted.k);
  t.p_value = chi2_sf(t.statistic, t.df);
  t.significant = t.p_value < 0.05;
  return t;
}

LagSelectionTable select_lag(const arma::mat& data, std::size_t pmax) {
  if (pmax < 1) throw Error(ErrorCode::domain, "select_lag: pmax must be at least 1");
  LagSelectionTable tab;
  tab.pmax = pmax;
  std::vector<VarModel> fits;
  fits.reserve(pmax + 1);
  for (std::size_t p = 0; p <= pmax; ++p) fits.push_back(fit_var(data, p, pmax));
  tab.T = fits.front().T;

  for (std::size_t p = 0; p <= pmax; ++p) {
    const auto ic = information_criteria(fits[p]);
    LagRow row{p, fits[p].loglik, std::nullopt, ic.fpe, ic.aic, ic.sc, ic.hq};
    if (p > 0) row.lr = sequential_lr(fits[p - 1], fits[p]);
    tab.rows.push_back(row);
  }

  // Strict comparisons keep the smaller lag on ties.
  auto argmin = [&](auto field) {
    std::size_t best = 0;
    for (std::size_t p = 1; p <= pmax; ++p)
      if (field(tab.rows[p]) < field(tab.rows[best])) best = p;
    return best;
  };
  tab.aic_lag = argmin([](const LagRow& r) { return r.aic; });
  tab.sc_lag = argmin([](const LagRow& r) { return r.sc; });
  tab.hq_lag = argmin([](const LagRow& r) { return r.hq; });
  tab.fpe_lag = argmin([](const LagRow& r) { return r.fpe; });
  tab.lr_lag = 0;
  for (std::size_t p = pmax; p >= 1; --p) {
    if (tab.rows[p].lr->significant) {
      tab.lr_lag = p;
      break;
    }
  }
  return tab;
}

}  // namespace msvar::var
