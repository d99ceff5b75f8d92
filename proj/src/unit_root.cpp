#include "msvar/unit_root.hpp"

#include <algorithm>
#include <armadillo>
#include <cmath>
#include <limits>
#include <vector>

#include "msvar/error.hpp"
#include "msvar/ols.hpp"

namespace msvar {

const char* to_string(Deterministic d) {
  return d == Deterministic::constant ? "constant" : "constant+trend";
}

}  // namespace msvar

namespace msvar::unitroot {

namespace {

// MacKinnon (1994), N = 1, as tabulated in statsmodels' adfvalues.
struct TauSurface {
  double small[3];
  double large[4];
  double tau_max;
  double tau_min;
  double tau_star;
};

constexpr TauSurface kTauConstant{{2.1659, 1.4412, 0.038269},
                                  {1.7339, 0.93202, -0.12745, -0.010368},
                                  2.74, -18.83, -1.61};
constexpr TauSurface kTauTrend{{3.2512, 1.6047, 0.049588},
                               {2.5261, 0.61654, -0.37956, -0.060285},
                               0.7, -16.18, -2.89};

// MacKinnon (2010) rows for 1%, 5%, 10%: b0 + b1/T + b2/T^2 + b3/T^3.
constexpr double kTau2010Constant[3][4] = {{-3.43035, -6.5393, -16.786, -79.433},
                                           {-2.86154, -2.8903, -4.234, -40.040},
                                           {-2.56677, -1.5384, -2.809, 0.0}};
constexpr double kTau2010Trend[3][4] = {{-3.95877, -9.0531, -28.428, -134.155},
                                        {-3.41049, -4.3904, -9.036, -45.374},
                                        {-3.12705, -2.5856, -3.925, -22.380}};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct DfRegression {
  double tstat = 0.0;
  double gamma = 0.0;
  double se_gamma = 0.0;
  double ssr = 0.0;
  std::size_t nobs = 0;
  std::size_t nreg = 0;
  arma::vec resid;
};

// d_j = c (+ trend) + gamma x_j + sum_i phi_i d_{j-i} + e, for j in [first, n-2],
// where d_j = x_{j+1} - x_j.
DfRegression df_regression(std::span<const double> x, Deterministic det, int lags,
                           std::size_t first) {
  const std::size_t n = x.size();
  const std::size_t rows = n - 1 - first;
  const std::size_t ndet = det == Deterministic::constant ? 1 : 2;
  const std::size_t K = ndet + 1 + static_cast<std::size_t>(lags);
  if (rows <= K) throw Error(ErrorCode::insufficient_data, "unit-root regression has too few rows");

  arma::mat X(rows, K);
  arma::vec y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t j = first + r;
    y(r) = x[j + 1] - x[j];
    X(r, 0) = 1.0;
    if (ndet == 2) X(r, 1) = static_cast<double>(j + 1);
    X(r, ndet) = x[j];
    for (int i = 1; i <= lags; ++i) X(r, ndet + i) = x[j - i + 1] - x[j - i];
  }
  OlsFit fit;
  try {
    fit = ols(X, y);
  } catch (const Error& e) {
    throw Error(ErrorCode::degenerate_input, std::string("unit-root regression: ") + e.what());
  }
  DfRegression out;
  out.nobs = rows;
  out.nreg = K;
  out.resid = fit.resid.col(0);
  out.ssr = arma::dot(out.resid, out.resid);
  const double s2 = out.ssr / static_cast<double>(rows - K);
  out.gamma = fit.beta(ndet, 0);
  out.se_gamma = std::sqrt(s2 * fit.xtx_inv(ndet, ndet));
  if (!(out.se_gamma > 0.0))
    throw Error(ErrorCode::degenerate_input, "unit-root regression has a perfect fit");
  out.tstat = out.gamma / out.se_gamma;
  return out;
}

void require_variation(std::span<const double> x, const char* test) {
  double lo = x[0], hi = x[0];
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::domain, std::string(test) + ": non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo <= 1e-14 * std::max(std::abs(hi), std::abs(lo)))
    throw Error(ErrorCode::degenerate_input, std::string(test) + ": constant series");
}

UnitRootResult finish_df(const char* name, const DfRegression& reg, double stat, int lags,
                         Deterministic det) {
  UnitRootResult r;
  r.test = name;
  r.statistic = stat;
  r.p_value = mackinnon_p(stat, det);
  r.lags = lags;
  r.det = det;
  r.nobs = reg.nobs;
  r.critical = mackinnon_critical(det, reg.nobs);
  r.reject_5 = *r.p_value < 0.05;
  r.reject_10 = *r.p_value < 0.10;
  return r;
}

}  // namespace

double mackinnon_p(double tau, Deterministic det) {
  const TauSurface& s = det == Deterministic::constant ? kTauConstant : kTauTrend;
  if (tau > s.tau_max) return 1.0;
  if (tau < s.tau_min) return 0.0;
  double poly = 0.0;
  if (tau <= s.tau_star) {
    for (int i = 2; i >= 0; --i) poly = poly * tau + s.small[i];
  } else {
    for (int i = 3; i >= 0; --i) poly = poly * tau + s.large[i];
  }
  return normal_cdf(poly);
}

CriticalValues mackinnon_critical(Deterministic det, std::size_t nobs) {
  const auto& tab = det == Deterministic::constant ? kTau2010Constant : kTau2010Trend;
  const double inv = 1.0 / static_cast<double>(nobs);
  double cv[3];
  for (int i = 0; i < 3; ++i)
    cv[i] = tab[i][0] + inv * (tab[i][1] + inv * (tab[i][2] + inv * tab[i][3]));
  return {cv[2], cv[1], cv[0]};
}

CriticalValues kpss_critical(Deterministic det) {
  // Kwiatkowski et al. (1992), Table 1.
  if (det == Deterministic::constant) return {0.347, 0.463, 0.739};
  return {0.119, 0.146, 0.216};
}

double bartlett_lrv(std::span<const double> e, int bandwidth) {
  const std::size_t n = e.size();
  auto autocov = [&](std::size_t j) {
    double s = 0.0;
    for (std::size_t t = j; t < n; ++t) s += e[t] * e[t - j];
    return s / static_cast<double>(n);
  };
  double lrv = autocov(0);
  for (int j = 1; j <= bandwidth && static_cast<std::size_t>(j) < n; ++j)
    lrv += 2.0 * (1.0 - j / (bandwidth + 1.0)) * autocov(static_cast<std::size_t>(j));
  return lrv;
}

UnitRootResult adf_test(std::span<const double> x, Deterministic det, LagChoice max_lags) {
  const std::size_t n = x.size();
  const int max_l = max_lags ? *max_lags
                             : static_cast<int>(std::floor(12.0 * std::pow(n / 100.0, 0.25)));
  if (max_l < 0) throw Error(ErrorCode::domain, "ADF: negative lag order");
  if (n <= static_cast<std::size_t>(max_l) + 10)
    throw Error(ErrorCode::insufficient_data, "ADF: series too short for the lag order");
  require_variation(x, "ADF");

  int lags = max_l;
  if (!max_lags) {
    double best = std::numeric_limits<double>::infinity();
    for (int l = 0; l <= max_l; ++l) {
      const auto reg = df_regression(x, det, l, static_cast<std::size_t>(max_l));
      const double nobs = static_cast<double>(reg.nobs);
      const double aic = std::log(reg.ssr / nobs) + 2.0 * static_cast<double>(reg.nreg) / nobs;
      if (aic < best) {
        best = aic;
        lags = l;
      }
    }
  }
  const auto reg = df_regression(x, det, lags, static_cast<std::size_t>(lags));
  return finish_df("ADF", reg, reg.tstat, lags, det);
}

UnitRootResult pp_test(std::span<const double> x, Deterministic det, LagChoice bandwidth) {
  const std::size_t n = x.size();
  if (n <= 20) throw Error(ErrorCode::insufficient_data, "PP: series too short");
  require_variation(x, "PP");
  const auto reg = df_regression(x, det, 0, 0);
  const double nobs = static_cast<double>(reg.nobs);
  const int bw = bandwidth ? *bandwidth
                           : static_cast<int>(std::floor(4.0 * std::pow(nobs / 100.0, 2.0 / 9.0)));
  if (bw < 0) throw Error(ErrorCode::domain, "PP: negative bandwidth");

  const std::span<const double> e(reg.resid.memptr(), reg.resid.n_elem);
  const double gamma0 = reg.ssr / nobs;
  const double lambda2 = bartlett_lrv(e, bw);
  const double s = std::sqrt(reg.ssr / (nobs - static_cast<double>(reg.nreg)));
  const double lambda = std::sqrt(lambda2);
  const double zt = std::sqrt(gamma0 / lambda2) * reg.tstat -
                    (lambda2 - gamma0) / (2.0 * lambda) * (nobs * reg.se_gamma / s);
  return finish_df("PP", reg, zt, bw, det);
}

UnitRootResult kpss_test(std::span<const double> x, Deterministic det, LagChoice bandwidth) {
  const std::size_t n = x.size();
  if (n <= 20) throw Error(ErrorCode::insufficient_data, "KPSS: series too short");
  require_variation(x, "KPSS");

  arma::mat X(n, det == Deterministic::constant ? 1 : 2, arma::fill::ones);
  if (det == Deterministic::constant_trend)
    for (std::size_t t = 0; t < n; ++t) X(t, 1) = static_cast<double>(t + 1);
  const arma::vec y(const_cast<double*>(x.data()), n, false, true);
  const arma::vec e = ols(X, y).resid.col(0);
  const std::span<const double> es(e.memptr(), e.n_elem);
  const double dn = static_cast<double>(n);

  int bw = 0;
  if (bandwidth) {
    bw = *bandwidth;
    if (bw < 0) throw Error(ErrorCode::domain, "KPSS: negative bandwidth");
  } else {
    // Newey-West (1994) plug-in with the Bartlett kernel.
    const int pilot = static_cast<int>(std::floor(4.0 * std::pow(dn / 100.0, 2.0 / 9.0)));
    double s0 = 0.0, s1 = 0.0;
    for (int j = 0; j <= pilot; ++j) {
      double c = 0.0;
      for (std::size_t t = static_cast<std::size_t>(j); t < n; ++t) c += e(t) * e(t - j);
      c /= dn;
      s0 += j == 0 ? c : 2.0 * c;
      s1 += 2.0 * j * c;
    }
    const double g = s0 > 0.0 ? 1.1447 * std::cbrt((s1 / s0) * (s1 / s0)) : 0.0;
    bw = static_cast<int>(std::floor(g * std::cbrt(dn)));
    bw = std::clamp(bw, 0, static_cast<int>(n) - 1);
  }

  double partial = 0.0, eta = 0.0;
  for (double v : es) {
    partial += v;
    eta += partial * partial;
  }
  const double lrv = bartlett_lrv(es, bw);
  if (!(lrv > 0.0)) throw Error(ErrorCode::degenerate_input, "KPSS: non-positive long-run variance");

  UnitRootResult r;
  r.test = "KPSS";
  r.statistic = eta / (dn * dn * lrv);
  r.lags = bw;
  r.det = det;
  r.nobs = n;
  r.critical = kpss_critical(det);
  r.reject_5 = r.statistic > r.critical.pct5;
  r.reject_10 = r.statistic > r.critical.pct10;
  return r;
}

}  // namespace msvar::unitroot
