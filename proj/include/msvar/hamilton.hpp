#pragma once

#include <armadillo>
#include <vector>

#include "msvar/ms_model.hpp"

namespace msvar::ms {

// Row t corresponds to data row p + t.
struct FilterOutput {
  arma::mat predicted;  // xi_{t|t-1}, n x m; first row is the model's initial distribution
  arma::mat filtered;   // xi_{t|t}, n x m
  arma::vec loglik_contrib;
  double loglik = 0.0;
};

struct SmoothedOutput {
  arma::mat smoothed;  // xi_{t|n}, n x m
  // slice t (t = 0..n-2): Pr(S_t = i, S_{t+1} = j | all data)
  arma::cube pairwise;
};

FilterOutput hamilton_filter(const MsVarModel& model, const arma::mat& data);

// Same recursion on precomputed log densities (n x m).
FilterOutput filter_log_densities(const MsVarModel& model, const arma::mat& log_dens);

SmoothedOutput kim_smoother(const FilterOutput& filter, const TransitionMatrix& P);

// argmax of each smoothed row; ties go to the lower regime index. 0-based.
std::vector<std::size_t> classify_regimes(const SmoothedOutput& smoothed);

}  // namespace msvar::ms
