#pragma once

#include <armadillo>
#include <cstdint>
#include <string>
#include <vector>

namespace msvar::ms {

// MSI(m)-VAR(p) when covariance_switching is false (one shared covariance),
// MSIH(m)-VAR(p) when true. Autoregressive matrices never switch.
struct MsVarSpec {
  std::size_t m = 2;
  std::size_t p = 1;
  std::size_t k = 1;
  bool covariance_switching = false;

  // m = 1 is accepted only as a degenerate harness for the low-level operations.
  void validate(bool allow_single_regime = false) const;
  std::string label() const;  // e.g. "MSIH(2)-VAR(1)"
};

// p_ij = Pr(S_t = j | S_{t-1} = i); rows sum to one.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  explicit TransitionMatrix(arma::mat P);  // validates

  static TransitionMatrix uniform(std::size_t m);
  static TransitionMatrix persistent(std::size_t m, double stay);

  const arma::mat& matrix() const { return P_; }
  std::size_t size() const { return P_.n_rows; }
  double operator()(std::size_t i, std::size_t j) const { return P_(i, j); }

 private:
  arma::mat P_;
};

struct MsVarModel {
  MsVarSpec spec;
  std::vector<arma::vec> intercepts;  // v_1..v_m, each k
  std::vector<arma::mat> ar;          // a_1..a_p, each k x k, shared across regimes
  std::vector<arma::mat> cov;         // Sigma_1..Sigma_m (identical when not switching)
  TransitionMatrix transition;
  arma::vec initial;  // regime distribution of the first effective observation

  void validate(bool allow_single_regime = false) const;
};

// Regime-specific Gaussian densities of y_t given its p lags. Column i of
// `lagged` holds y_{t-1-i}.
arma::vec regime_conditional_density(const MsVarModel& model, const arma::vec& y_t,
                                     const arma::mat& lagged);

// Response rows p..T-1 and stacked lags [y_{t-1}', ..., y_{t-p}'] for each.
struct Design {
  arma::mat Y;  // n x k
  arma::mat X;  // n x kp
};
Design build_design(const arma::mat& data, std::size_t p);

// n x m matrix of log N(y_t; v_m + A x_t, Sigma_m). Throws ErrorCode::density
// when a covariance is not positive definite.
arma::mat log_densities(const MsVarModel& model, const Design& d);

// Relabels regimes so that new regime i is old regime perm[i].
MsVarModel permute_regimes(const MsVarModel& model, const std::vector<std::size_t>& perm);

// Orders regimes by descending intercept of the first variable.
MsVarModel canonicalize(const MsVarModel& model);

std::size_t parameter_count(const MsVarSpec& spec);

// Per-observation AIC, same convention as the linear VAR criteria.
double model_aic(const MsVarModel& model, double loglik, std::size_t T);

arma::vec ergodic_distribution(const TransitionMatrix& P);

arma::vec expected_duration(const TransitionMatrix& P);

struct Simulation {
  arma::mat data;                    // T x k
  std::vector<std::size_t> regimes;  // 0-based regime per period
};

// Regime path starts from `initial` and follows the transition matrix; the
// presample lags sit at the unconditional mean implied by the initial mix.
Simulation simulate(const MsVarModel& model, std::size_t T, std::uint64_t seed);

// Packs every free parameter into one vector (for change norms and tests).
arma::vec pack_parameters(const MsVarModel& model);

}  // namespace msvar::ms
