#pragma once

#include <armadillo>

namespace msvar {

struct OlsFit {
  arma::mat beta;     // regressors x responses
  arma::mat resid;    // rows x responses
  arma::mat xtx_inv;  // (X'X)^{-1}
};

// Multi-response least squares on a shared regressor matrix. Throws
// ErrorCode::rank_deficiency when X'X is numerically singular after column
// scaling.
OlsFit ols(const arma::mat& X, const arma::mat& Y);

// Natural log of the determinant of a symmetric positive definite matrix;
// -inf when it is singular.
double log_det_spd(const arma::mat& S);

}  // namespace msvar
