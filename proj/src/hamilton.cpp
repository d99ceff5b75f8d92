#include "msvar/hamilton.hpp"

#include <cmath>

#include "msvar/error.hpp"

namespace msvar::ms {

FilterOutput filter_log_densities(const MsVarModel& model, const arma::mat& log_dens) {
  const std::size_t n = log_dens.n_rows, m = model.spec.m;
  const arma::mat& P = model.transition.matrix();
  FilterOutput out;
  out.predicted.set_size(n, m);
  out.filtered.set_size(n, m);
  out.loglik_contrib.set_size(n);

  arma::rowvec pred = model.initial.t();
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      pred = out.filtered.row(t - 1) * P;
      pred /= arma::accu(pred);
    }
    out.predicted.row(t) = pred;

    // Scale by the largest log density among regimes that can occur.
    double shift = -arma::datum::inf;
    for (std::size_t j = 0; j < m; ++j)
      if (pred(j) > 0.0) shift = std::max(shift, log_dens(t, j));
    if (!std::isfinite(shift)) throw FilterError(t, "no reachable regime has positive density");

    arma::rowvec joint(m);
    for (std::size_t j = 0; j < m; ++j)
      joint(j) = pred(j) > 0.0 ? pred(j) * std::exp(log_dens(t, j) - shift) : 0.0;
    const double total = arma::accu(joint);
    if (!(total > 0.0) || !std::isfinite(total))
      throw FilterError(t, "total density is zero or not finite");
    out.filtered.row(t) = joint / total;
    out.loglik_contrib(t) = shift + std::log(total);
  }
  out.loglik = arma::accu(out.loglik_contrib);
  return out;
}

FilterOutput hamilton_filter(const MsVarModel& model, const arma::mat& data) {
  model.validate(true);
  if (data.n_cols != model.spec.k) throw Error(ErrorCode::domain, "hamilton_filter: wrong column count");
  const Design d = build_design(data, model.spec.p);
  return filter_log_densities(model, log_densities(model, d));
}

SmoothedOutput kim_smoother(const FilterOutput& filter, const TransitionMatrix& T) {
  const std::size_t n = filter.filtered.n_rows, m = filter.filtered.n_cols;
  const arma::mat& P = T.matrix();
  if (P.n_rows != m) throw Error(ErrorCode::smoother, "kim_smoother: transition size mismatch");
  if (n == 0) throw Error(ErrorCode::smoother, "kim_smoother: empty filter output");

  SmoothedOutput out;
  out.smoothed.set_size(n, m);
  out.pairwise.set_size(m, m, n > 0 ? n - 1 : 0);
  out.smoothed.row(n - 1) = filter.filtered.row(n - 1);

  arma::vec ratio(m);
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t j = 0; j < m; ++j) {
      const double s = out.smoothed(t + 1, j);
      const double pr = filter.predicted(t + 1, j);
      if (pr > 0.0) {
        ratio(j) = s / pr;
      } else if (s <= 0.0) {
        ratio(j) = 0.0;
      } else {
        throw Error(ErrorCode::smoother, "zero predicted probability with positive smoothed mass at t=" +
                                             std::to_string(t + 1));
      }
    }
    arma::mat joint = arma::diagmat(filter.filtered.row(t)) * (P.each_row() % ratio.t());
    const double total = arma::accu(joint);
    if (!(total > 0.0)) throw Error(ErrorCode::smoother, "degenerate smoothing weights at t=" + std::to_string(t));
    joint /= total;
    out.pairwise.slice(t) = joint;
    out.smoothed.row(t) = arma::sum(joint, 1).t();
  }
  return out;
}

std::vector<std::size_t> classify_regimes(const SmoothedOutput& smoothed) {
  std::vector<std::size_t> labels(smoothed.smoothed.n_rows);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < smoothed.smoothed.n_cols; ++j)
      if (smoothed.smoothed(t, j) > smoothed.smoothed(t, best)) best = j;
    labels[t] = best;
  }
  return labels;
}

}  // namespace msvar::ms
