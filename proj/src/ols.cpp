#include "msvar/ols.hpp"

#include <cmath>
#include <limits>

#include "msvar/error.hpp"

namespace msvar {

OlsFit ols(const arma::mat& X, const arma::mat& Y) {
  if (X.n_rows != Y.n_rows)
    throw Error(ErrorCode::insufficient_data, "ols: row mismatch");
  if (X.n_rows < X.n_cols)
    throw Error(ErrorCode::insufficient_data, "ols: fewer rows than regressors");

  arma::vec norms = arma::sqrt(arma::sum(arma::square(X), 0).t());
  if (norms.min() <= 0.0) throw Error(ErrorCode::rank_deficiency, "ols: zero regressor column");
  const arma::mat Xs = X.each_row() / norms.t();
  const arma::mat xtx_s = Xs.t() * Xs;
  if (arma::rcond(xtx_s) < 1e-12)
    throw Error(ErrorCode::rank_deficiency, "ols: singular regressor cross-product");

  const arma::mat inv_s = arma::inv_sympd(xtx_s);
  OlsFit fit;
  fit.beta = (inv_s * (Xs.t() * Y)).eval().each_col() / norms;
  fit.xtx_inv = inv_s / (norms * norms.t());
  fit.resid = Y - X * fit.beta;
  return fit;
}

double log_det_spd(const arma::mat& S) {
  arma::mat L;
  if (!arma::chol(L, S, "lower")) return -std::numeric_limits<double>::infinity();
  return 2.0 * arma::accu(arma::log(L.diag()));
}

}  // namespace msvar
