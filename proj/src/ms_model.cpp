#include "msvar/ms_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "msvar/error.hpp"

namespace msvar::ms {

namespace {

constexpr double kRowTol = 1e-10;

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

}  // namespace

void MsVarSpec::validate(bool allow_single_regime) const {
  if (m < (allow_single_regime ? 1u : 2u))
    throw Error(ErrorCode::domain, "MsVarSpec: need at least two regimes");
  if (k < 1) throw Error(ErrorCode::domain, "MsVarSpec: need at least one variable");
}

std::string MsVarSpec::label() const {
  return std::string(covariance_switching ? "MSIH(" : "MSI(") + std::to_string(m) + ")-VAR(" +
         std::to_string(p) + ")";
}

TransitionMatrix::TransitionMatrix(arma::mat P) : P_(std::move(P)) {
  if (P_.n_rows == 0 || P_.n_rows != P_.n_cols)
    throw Error(ErrorCode::domain, "TransitionMatrix: must be square and non-empty");
  for (std::size_t i = 0; i < P_.n_rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < P_.n_cols; ++j) {
      const double v = P_(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorCode::domain, "TransitionMatrix: entry outside [0, 1]");
      s += v;
    }
    if (std::abs(s - 1.0) > kRowTol)
      throw Error(ErrorCode::domain, "TransitionMatrix: row " + std::to_string(i) + " does not sum to 1");
  }
}

TransitionMatrix TransitionMatrix::uniform(std::size_t m) {
  return TransitionMatrix(arma::mat(m, m, arma::fill::value(1.0 / static_cast<double>(m))));
}

TransitionMatrix TransitionMatrix::persistent(std::size_t m, double stay) {
  if (m == 1) return TransitionMatrix(arma::mat(1, 1, arma::fill::ones));
  arma::mat P(m, m, arma::fill::value((1.0 - stay) / static_cast<double>(m - 1)));
  P.diag().fill(stay);
  return TransitionMatrix(P);
}

void MsVarModel::validate(bool allow_single_regime) const {
  spec.validate(allow_single_regime);
  const auto m = spec.m, k = spec.k;
  if (intercepts.size() != m || cov.size() != m || ar.size() != spec.p)
    throw Error(ErrorCode::domain, "MsVarModel: parameter counts do not match the spec");
  for (const auto& v : intercepts)
    if (v.n_elem != k) throw Error(ErrorCode::domain, "MsVarModel: intercept has wrong length");
  for (const auto& a : ar)
    if (a.n_rows != k || a.n_cols != k) throw Error(ErrorCode::domain, "MsVarModel: AR matrix has wrong shape");
  for (const auto& s : cov)
    if (s.n_rows != k || s.n_cols != k) throw Error(ErrorCode::domain, "MsVarModel: covariance has wrong shape");
  if (transition.size() != m) throw Error(ErrorCode::domain, "MsVarModel: transition matrix has wrong size");
  if (initial.n_elem != m || initial.min() < 0.0 || std::abs(arma::accu(initial) - 1.0) > kRowTol)
    throw Error(ErrorCode::domain, "MsVarModel: initial distribution is not on the simplex");
}

Design build_design(const arma::mat& data, std::size_t p) {
  const std::size_t T = data.n_rows, k = data.n_cols;
  if (T <= p) throw Error(ErrorCode::insufficient_data, "need more observations than lags");
  const std::size_t n = T - p;
  Design d;
  d.Y = data.rows(p, T - 1);
  d.X.set_size(n, k * p);
  for (std::size_t i = 1; i <= p; ++i) d.X.cols((i - 1) * k, i * k - 1) = data.rows(p - i, T - 1 - i);
  return d;
}

namespace {

arma::mat stacked_ar(const MsVarModel& model) {
  const std::size_t k = model.spec.k;
  arma::mat A(k, k * model.spec.p);
  for (std::size_t i = 0; i < model.spec.p; ++i) A.cols(i * k, (i + 1) * k - 1) = model.ar[i];
  return A;
}

arma::mat lower_cholesky(const arma::mat& S, std::size_t regime) {
  arma::mat L;
  if (!S.is_symmetric(1e-10 * std::max(1.0, arma::abs(S).max())) || !arma::chol(L, S, "lower"))
    throw Error(ErrorCode::density,
                "covariance of regime " + std::to_string(regime + 1) + " is not positive definite");
  return L;
}

}  // namespace

arma::mat log_densities(const MsVarModel& model, const Design& d) {
  const std::size_t n = d.Y.n_rows, m = model.spec.m, k = model.spec.k;
  const arma::mat A = stacked_ar(model);
  const arma::mat common = model.spec.p > 0 ? arma::mat(d.Y - d.X * A.t()) : d.Y;
  arma::mat out(n, m);
  for (std::size_t r = 0; r < m; ++r) {
    const arma::mat L = lower_cholesky(model.cov[r], r);
    const double log_norm = -0.5 * static_cast<double>(k) * kLog2Pi - arma::accu(arma::log(L.diag()));
    const arma::mat resid = (common.each_row() - model.intercepts[r].t()).t();  // k x n
    const arma::mat z = arma::solve(arma::trimatl(L), resid);
    out.col(r) = log_norm - 0.5 * arma::sum(arma::square(z), 0).t();
  }
  return out;
}

arma::vec regime_conditional_density(const MsVarModel& model, const arma::vec& y_t,
                                     const arma::mat& lagged) {
  const std::size_t k = model.spec.k, p = model.spec.p;
  if (y_t.n_elem != k || lagged.n_rows != k || lagged.n_cols != p)
    throw Error(ErrorCode::domain, "regime_conditional_density: dimension mismatch");
  Design d;
  d.Y = y_t.t();
  d.X = arma::vectorise(lagged).t();
  return arma::exp(log_densities(model, d).row(0).t());
}

MsVarModel permute_regimes(const MsVarModel& model, const std::vector<std::size_t>& perm) {
  const std::size_t m = model.spec.m;
  if (perm.size() != m) throw Error(ErrorCode::domain, "permute_regimes: wrong permutation length");
  MsVarModel out = model;
  arma::mat P(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    out.intercepts[i] = model.intercepts[perm[i]];
    out.cov[i] = model.cov[perm[i]];
    out.initial(i) = model.initial(perm[i]);
    for (std::size_t j = 0; j < m; ++j) P(i, j) = model.transition(perm[i], perm[j]);
  }
  out.transition = TransitionMatrix(P);
  return out;
}

MsVarModel canonicalize(const MsVarModel& model) {
  std::vector<std::size_t> perm(model.spec.m);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return model.intercepts[a](0) > model.intercepts[b](0);
  });
  return permute_regimes(model, perm);
}

std::size_t parameter_count(const MsVarSpec& spec) {
  const std::size_t cov = spec.k * (spec.k + 1) / 2;
  return spec.m * spec.k + spec.p * spec.k * spec.k + cov * (spec.covariance_switching ? spec.m : 1) +
         spec.m * (spec.m - 1);
}

double model_aic(const MsVarModel& model, double loglik, std::size_t T) {
  return (-2.0 * loglik + 2.0 * static_cast<double>(parameter_count(model.spec))) /
         static_cast<double>(T);
}

namespace {

// Primitive (irreducible and aperiodic) iff the boolean power P^{(m-1)^2+1} is all positive.
bool is_primitive(const arma::mat& P) {
  const std::size_t m = P.n_rows;
  arma::umat B = P > 0.0;
  arma::umat R = B;
  const std::size_t steps = (m - 1) * (m - 1);
  for (std::size_t s = 0; s < steps; ++s) R = (R * B) > 0;
  return arma::all(arma::vectorise(R) > 0);
}

}  // namespace

arma::vec ergodic_distribution(const TransitionMatrix& T) {
  const arma::mat& P = T.matrix();
  const std::size_t m = P.n_rows;
  if (!is_primitive(P))
    throw Error(ErrorCode::ergodicity, "transition matrix is not irreducible and aperiodic");
  // (I - P') pi = 0 with the last equation replaced by sum(pi) = 1.
  arma::mat A = arma::eye(m, m) - P.t();
  A.row(m - 1).ones();
  arma::vec b(m, arma::fill::zeros);
  b(m - 1) = 1.0;
  arma::vec pi = arma::solve(A, b);
  // One step of iterative refinement keeps pi' P = pi' at rounding level.
  arma::vec r = b - A * pi;
  pi += arma::solve(A, r);
  if (pi.min() <= 0.0) throw Error(ErrorCode::ergodicity, "stationary distribution has a zero entry");
  return pi / arma::accu(pi);
}

arma::vec expected_duration(const TransitionMatrix& T) {
  const std::size_t m = T.size();
  arma::vec d(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double stay = T(i, i);
    if (stay >= 1.0)
      throw Error(ErrorCode::infinite_duration, "regime " + std::to_string(i + 1) + " is absorbing");
    d(i) = 1.0 / (1.0 - stay);
  }
  return d;
}

namespace {

arma::mat psd_sqrt(const arma::mat& S) {
  arma::vec ev;
  arma::mat V;
  arma::eig_sym(ev, V, 0.5 * (S + S.t()));
  ev = arma::sqrt(arma::clamp(ev, 0.0, arma::datum::inf));
  return V * arma::diagmat(ev) * V.t();
}

std::size_t draw(const arma::rowvec& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double c = 0.0;
  for (std::size_t j = 0; j + 1 < probs.n_elem; ++j) {
    c += probs(j);
    if (u < c) return j;
  }
  return probs.n_elem - 1;
}

}  // namespace

Simulation simulate(const MsVarModel& model, std::size_t T, std::uint64_t seed) {
  const std::size_t m = model.spec.m, k = model.spec.k, p = model.spec.p;
  if (T <= p) throw Error(ErrorCode::insufficient_data, "simulate: T must exceed p");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<arma::mat> roots;
  for (std::size_t r = 0; r < m; ++r) {
    if (!model.cov[r].is_finite()) throw Error(ErrorCode::domain, "simulate: non-finite covariance");
    roots.push_back(psd_sqrt(model.cov[r]));
  }

  arma::vec mix(k, arma::fill::zeros);
  for (std::size_t r = 0; r < m; ++r) mix += model.initial(r) * model.intercepts[r];
  arma::mat I_minus = arma::eye(k, k);
  for (const auto& a : model.ar) I_minus -= a;
  arma::vec mu;
  if (!arma::solve(mu, I_minus, mix, arma::solve_opts::no_approx)) mu.zeros(k);

  Simulation sim;
  sim.data.set_size(T, k);
  sim.regimes.resize(T);
  std::vector<arma::vec> history(p, mu);  // history[i] = y_{t-1-i}
  std::size_t s = draw(model.initial.t(), rng);
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) s = draw(model.transition.matrix().row(s), rng);
    arma::vec u(k);
    for (std::size_t j = 0; j < k; ++j) u(j) = normal(rng);
    arma::vec y = model.intercepts[s] + roots[s] * u;
    for (std::size_t i = 0; i < p; ++i) y += model.ar[i] * history[i];
    if (p > 0) {
      std::rotate(history.rbegin(), history.rbegin() + 1, history.rend());
      history[0] = y;
    }
    sim.data.row(t) = y.t();
    sim.regimes[t] = s;
  }
  return sim;
}

arma::vec pack_parameters(const MsVarModel& model) {
  std::vector<double> v;
  for (const auto& x : model.intercepts) v.insert(v.end(), x.begin(), x.end());
  for (const auto& a : model.ar) v.insert(v.end(), a.begin(), a.end());
  for (const auto& s : model.cov) v.insert(v.end(), s.begin(), s.end());
  v.insert(v.end(), model.transition.matrix().begin(), model.transition.matrix().end());
  v.insert(v.end(), model.initial.begin(), model.initial.end());
  return arma::vec(v);
}

}  // namespace msvar::ms
