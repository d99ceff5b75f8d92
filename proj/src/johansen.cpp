#include "msvar/johansen.hpp"

#include <algorithm>
#include <cmath>

#include "msvar/error.hpp"
#include "msvar/ols.hpp"

namespace msvar::johansen {

namespace {

// Rows are k - r = 1..5; columns 10%, 5%, 1%.
constexpr double kTraceConstant[5][3] = {{2.7055, 3.8415, 6.6349},
                                         {13.4294, 15.4943, 19.9349},
                                         {27.0669, 29.7961, 35.4628},
                                         {44.4929, 47.8545, 54.6815},
                                         {65.8202, 69.8189, 77.8202}};
constexpr double kMaxEigConstant[5][3] = {{2.7055, 3.8415, 6.6349},
                                          {12.2971, 14.2639, 18.5200},
                                          {18.8928, 21.1314, 25.8650},
                                          {25.1236, 27.5858, 32.7172},
                                          {31.2379, 33.8777, 39.3693}};
constexpr double kTraceTrend[5][3] = {{2.7055, 3.8415, 6.6349},
                                      {16.1619, 18.3985, 23.1485},
                                      {32.0645, 35.0116, 41.0815},
                                      {51.6492, 55.2459, 62.5202},
                                      {75.1027, 79.3422, 87.7748}};
constexpr double kMaxEigTrend[5][3] = {{2.7055, 3.8415, 6.6349},
                                       {15.0006, 17.1481, 21.7465},
                                       {21.8731, 24.2522, 29.2631},
                                       {28.2398, 30.8151, 36.1930},
                                       {34.4202, 37.1646, 42.8612}};

CriticalValues lookup(const double (&tab)[5][3], std::size_t k_minus_r) {
  if (k_minus_r < 1 || k_minus_r > 5)
    throw Error(ErrorCode::unsupported, "johansen: critical values tabulated for k - r <= 5 only");
  const auto& row = tab[k_minus_r - 1];
  return {row[0], row[1], row[2]};
}

// Reference critical values for the bivariate case, reported next to the standard table.
constexpr CriticalValues kReferenceR0{7.52, 9.24, 12.97};
constexpr CriticalValues kReferenceTraceR1{17.85, 19.96, 24.60};
constexpr CriticalValues kReferenceMaxEigR1{13.75, 15.67, 20.20};

}  // namespace

CriticalValues trace_critical(std::size_t k_minus_r, Deterministic det) {
  return lookup(det == Deterministic::constant ? kTraceConstant : kTraceTrend, k_minus_r);
}

CriticalValues max_eig_critical(std::size_t k_minus_r, Deterministic det) {
  return lookup(det == Deterministic::constant ? kMaxEigConstant : kMaxEigTrend, k_minus_r);
}

JohansenResult johansen_test(const arma::mat& levels, std::size_t p, Deterministic det) {
  const std::size_t T = levels.n_rows;
  const std::size_t k = levels.n_cols;
  if (k < 2) throw Error(ErrorCode::unsupported, "johansen: need at least two series");
  if (k > 5) throw Error(ErrorCode::unsupported, "johansen: at most five series supported");
  if (p < 1) throw Error(ErrorCode::domain, "johansen: lag order must be at least 1");
  const std::size_t ndet = det == Deterministic::constant ? 1 : 2;
  const std::size_t nz2 = ndet + k * (p - 1);
  if (T <= p || T - p <= nz2 + k + 1)
    throw Error(ErrorCode::insufficient_data, "johansen: sample too short for the lag order");

  const arma::mat dy = arma::diff(levels, 1, 0);  // row j is y_{j+1} - y_j
  const std::size_t n = T - p;

  // Observation t = p..T-1 in levels; dy row of Delta y_t is t-1.
  arma::mat Z0(n, k), Z1(n, k), Z2(n, nz2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = p + i;
    Z0.row(i) = dy.row(t - 1);
    Z1.row(i) = levels.row(t - 1);
    Z2(i, 0) = 1.0;
    if (ndet == 2) Z2(i, 1) = static_cast<double>(t);
    for (std::size_t l = 1; l < p; ++l)
      Z2.row(i).cols(ndet + (l - 1) * k, ndet + l * k - 1) = dy.row(t - 1 - l);
  }

  arma::mat R0, R1;
  try {
    R0 = ols(Z2, Z0).resid;
    R1 = ols(Z2, Z1).resid;
  } catch (const Error& e) {
    throw Error(ErrorCode::rank_deficiency, std::string("johansen: ") + e.what());
  }
  const double dn = static_cast<double>(n);
  const arma::mat S00 = R0.t() * R0 / dn;
  const arma::mat S11 = R1.t() * R1 / dn;
  const arma::mat S01 = R0.t() * R1 / dn;

  arma::mat L11, L00;
  if (!arma::chol(L11, S11, "lower") || !arma::chol(L00, S00, "lower"))
    throw Error(ErrorCode::rank_deficiency, "johansen: singular moment matrix");
  // L11^{-1} S10 S00^{-1} S01 L11^{-T} is symmetric with the same eigenvalues.
  const arma::mat A = arma::solve(arma::trimatl(L00), S01);        // L00^{-1} S01
  const arma::mat B = arma::solve(arma::trimatl(L11), A.t());      // L11^{-1} S10 L00^{-T}
  arma::mat M = B * B.t();
  M = 0.5 * (M + M.t());
  arma::vec ev;
  if (!arma::eig_sym(ev, M)) throw Error(ErrorCode::rank_deficiency, "johansen: eigensolver failed");
  std::vector<double> lambdas(ev.begin(), ev.end());
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  for (double& l : lambdas) l = std::clamp(l, 0.0, std::nextafter(1.0, 0.0));

  JohansenResult res;
  res.eigenvalues = lambdas;
  res.lags = p;
  res.det = det;
  res.nobs = n;
  std::vector<double> terms(k);
  for (std::size_t i = 0; i < k; ++i) terms[i] = -dn * std::log1p(-lambdas[i]);
  bool trace_stop = false, max_stop = false;
  res.trace_rank_5 = k;
  res.max_eig_rank_5 = k;
  for (std::size_t r = 0; r < k; ++r) {
    RankTest rt;
    rt.r = r;
    rt.max_eig = terms[r];
    for (std::size_t i = r; i < k; ++i) rt.trace += terms[i];
    rt.trace_cv = trace_critical(k - r, det);
    rt.max_eig_cv = max_eig_critical(k - r, det);
    rt.trace_reject_5 = rt.trace > rt.trace_cv.pct5;
    rt.max_eig_reject_5 = rt.max_eig > rt.max_eig_cv.pct5;
    if (k == 2 && det == Deterministic::constant) {
      rt.reference_trace_cv = r == 0 ? kReferenceR0 : kReferenceTraceR1;
      rt.reference_max_eig_cv = r == 0 ? kReferenceR0 : kReferenceMaxEigR1;
    }
    if (!trace_stop && !rt.trace_reject_5) {
      res.trace_rank_5 = r;
      trace_stop = true;
    }
    if (!max_stop && !rt.max_eig_reject_5) {
      res.max_eig_rank_5 = r;
      max_stop = true;
    }
    res.ranks.push_back(rt);
  }
  return res;
}

}  // namespace msvar::johansen
