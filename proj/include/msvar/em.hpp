#pragma once

#include <armadillo>
#include <cstdint>
#include <optional>
#include <vector>

#include "msvar/error.hpp"
#include "msvar/hamilton.hpp"
#include "msvar/ms_model.hpp"

namespace msvar::ms {

struct EmStep {
  MsVarModel model;      // updated parameters
  double loglik = 0.0;   // log-likelihood of the input parameters
};

// One expectation-maximisation pass. The M-step is closed form: transition
// and initial distribution from the smoothed probabilities, intercepts and
// shared AR matrices by probability-weighted GLS, covariances from weighted
// residual cross-products (pooled unless covariance_switching). For MSIH the
// mean parameters are solved given the incoming covariances, so the update is
// a conditional maximisation and still never lowers the likelihood.
EmStep em_step(const MsVarModel& model, const arma::mat& data);

// M-step from explicit regime weights (n x m) and pairwise sums (m x m).
// `cov_for_gls` supplies the covariances that weight the mean equations.
MsVarModel maximize(const MsVarSpec& spec, const Design& d, const arma::mat& weights,
                    const arma::mat& transition_counts, const arma::vec& initial,
                    const std::vector<arma::mat>& cov_for_gls);

struct FitOptions {
  double tol = 1e-8;          // relative log-likelihood change
  std::size_t max_iter = 500;
  std::size_t restarts = 10;
  std::uint64_t seed = 20211001;
  std::size_t threads = 1;    // restarts run concurrently when > 1
};

struct FitDiagnostics {
  std::size_t iterations = 0;
  std::vector<double> loglik_trace;  // one entry per EM iteration, winning restart
  bool converged = false;
  double final_change_norm = 0.0;
  std::size_t restarts_used = 0;
  std::size_t restarts_failed = 0;
  std::size_t best_restart = 0;
  double loglik = 0.0;
  double aic = 0.0;
  // Most negative change between consecutive trace entries over every restart; 0 when monotone.
  double worst_step = 0.0;
};

struct FitResult {
  MsVarModel model;
  FitDiagnostics diagnostics;
  FilterOutput filter;
  SmoothedOutput smoothed;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::optional<FitResult> best)
      : Error(ErrorCode::non_convergence, what), best_(std::move(best)) {}
  const std::optional<FitResult>& best_so_far() const { return best_; }

 private:
  std::optional<FitResult> best_;
};

// Runs EM from `restarts` seeded starting points and keeps the highest
// likelihood among converged runs (ties go to the lower restart index).
// Regimes are returned in canonical order.
FitResult fit(const arma::mat& data, const MsVarSpec& spec, const FitOptions& opts = {});

// Runs EM from a given starting model; no restarts, no relabelling.
FitResult fit_from(const MsVarModel& start, const arma::mat& data, const FitOptions& opts = {});

// Starting point for restart `index` (index 0 is unperturbed).
MsVarModel initial_model(const arma::mat& data, const MsVarSpec& spec, std::uint64_t seed,
                         std::size_t index);

}  // namespace msvar::ms
