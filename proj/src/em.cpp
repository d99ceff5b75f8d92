#include "msvar/em.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include "msvar/var.hpp"

namespace msvar::ms {

namespace {

constexpr double kCovFloor = 1e-12;

arma::mat floor_covariance(arma::mat S) {
  S = 0.5 * (S + S.t());
  arma::vec ev;
  arma::mat V;
  if (!arma::eig_sym(ev, V, S)) throw Error(ErrorCode::regime_collapse, "covariance eigensolver failed");
  if (ev.min() >= kCovFloor) return S;
  ev = arma::clamp(ev, kCovFloor, arma::datum::inf);
  S = V * arma::diagmat(ev) * V.t();
  return 0.5 * (S + S.t());
}

}  // namespace

MsVarModel maximize(const MsVarSpec& spec, const Design& d, const arma::mat& weights,
                    const arma::mat& transition_counts, const arma::vec& initial,
                    const std::vector<arma::mat>& cov_for_gls) {
  const std::size_t n = d.Y.n_rows, k = spec.k, m = spec.m, p = spec.p;
  const std::size_t kp = k * p, q = m + kp;
  const arma::rowvec mass = arma::sum(weights, 0);
  const double min_mass = spec.covariance_switching ? static_cast<double>(k) + 1.0 : 1.0;
  for (std::size_t j = 0; j < m; ++j)
    if (!(mass(j) >= min_mass))
      throw Error(ErrorCode::regime_collapse,
                  "regime " + std::to_string(j + 1) + " has effective weight " + std::to_string(mass(j)) +
                      "; restart advised");

  // Per regime, with z_t = [e_j; x_t]: Z_j = sum_t w_tj z z', C_j = sum_t w_tj y_t z'.
  std::vector<arma::mat> Z(m), C(m);
  for (std::size_t j = 0; j < m; ++j) {
    const arma::vec w = weights.col(j);
    Z[j].zeros(q, q);
    C[j].zeros(k, q);
    Z[j](j, j) = mass(j);
    C[j].col(j) = d.Y.t() * w;
    if (kp > 0) {
      const arma::mat Xw = d.X.each_col() % w;
      const arma::vec xw = d.X.t() * w;
      Z[j].submat(m, j, q - 1, j) = xw;
      Z[j].submat(j, m, j, q - 1) = xw.t();
      Z[j].submat(m, m, q - 1, q - 1) = d.X.t() * Xw;
      C[j].cols(m, q - 1) = d.Y.t() * Xw;
    }
  }

  // Normal equations: sum_j Omega_j Theta Z_j = sum_j Omega_j C_j.
  arma::mat Theta;
  if (!spec.covariance_switching) {
    arma::mat Zs(q, q, arma::fill::zeros), Cs(k, q, arma::fill::zeros);
    for (std::size_t j = 0; j < m; ++j) {
      Zs += Z[j];
      Cs += C[j];
    }
    if (arma::rcond(Zs) < 1e-14) throw Error(ErrorCode::rank_deficiency, "M-step: singular weighted moments");
    Theta = arma::solve(Zs, Cs.t(), arma::solve_opts::likely_sympd).t();
  } else {
    arma::mat H(k * q, k * q, arma::fill::zeros);
    arma::vec g(k * q, arma::fill::zeros);
    for (std::size_t j = 0; j < m; ++j) {
      arma::mat Omega;
      if (!arma::inv_sympd(Omega, cov_for_gls[j]))
        throw Error(ErrorCode::density, "M-step: covariance of regime " + std::to_string(j + 1) + " is singular");
      H += arma::kron(Z[j], Omega);
      g += arma::vectorise(Omega * C[j]);
    }
    H = 0.5 * (H + H.t());
    if (arma::rcond(H) < 1e-14) throw Error(ErrorCode::rank_deficiency, "M-step: singular GLS system");
    const arma::vec theta = arma::solve(H, g, arma::solve_opts::likely_sympd);
    Theta = arma::reshape(theta, k, q);
  }

  MsVarModel out;
  out.spec = spec;
  for (std::size_t j = 0; j < m; ++j) out.intercepts.push_back(Theta.col(j));
  for (std::size_t i = 0; i < p; ++i) out.ar.push_back(Theta.cols(m + i * k, m + (i + 1) * k - 1));

  const arma::mat common = kp > 0 ? arma::mat(d.Y - d.X * Theta.cols(m, q - 1).t()) : d.Y;
  arma::mat pooled(k, k, arma::fill::zeros);
  for (std::size_t j = 0; j < m; ++j) {
    const arma::mat R = common.each_row() - out.intercepts[j].t();
    const arma::mat S = R.t() * (R.each_col() % weights.col(j));
    if (spec.covariance_switching) {
      out.cov.push_back(floor_covariance(S / mass(j)));
    } else {
      pooled += S;
    }
  }
  if (!spec.covariance_switching)
    out.cov.assign(m, floor_covariance(pooled / static_cast<double>(n)));

  arma::mat P = transition_counts;
  for (std::size_t i = 0; i < m; ++i) {
    const double s = arma::accu(P.row(i));
    if (!(s > 0.0)) throw Error(ErrorCode::regime_collapse, "no transitions out of regime " + std::to_string(i + 1));
    P.row(i) /= s;
  }
  out.transition = TransitionMatrix(P);
  out.initial = initial / arma::accu(initial);
  return out;
}

EmStep em_step(const MsVarModel& model, const arma::mat& data) {
  model.validate(true);
  const Design d = build_design(data, model.spec.p);
  const FilterOutput f = filter_log_densities(model, log_densities(model, d));
  const SmoothedOutput s = kim_smoother(f, model.transition);
  const std::size_t m = model.spec.m;
  arma::mat counts = s.pairwise.n_slices > 0 ? arma::sum(s.pairwise, 2) : arma::mat(arma::eye(m, m));
  EmStep step;
  step.loglik = f.loglik;
  step.model = maximize(model.spec, d, s.smoothed, counts, s.smoothed.row(0).t(), model.cov);
  return step;
}

namespace {

bool converged_between(double prev, double cur, double tol) {
  return std::abs(cur - prev) <= tol * std::max(1.0, std::abs(prev));
}

}  // namespace

FitResult fit_from(const MsVarModel& start, const arma::mat& data, const FitOptions& opts) {
  FitResult res;
  MsVarModel model = start;
  auto& diag = res.diagnostics;
  for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
    EmStep step = em_step(model, data);
    if (!diag.loglik_trace.empty())
      diag.worst_step = std::min(diag.worst_step, step.loglik - diag.loglik_trace.back());
    diag.loglik_trace.push_back(step.loglik);
    diag.final_change_norm = arma::norm(pack_parameters(step.model) - pack_parameters(model));
    model = std::move(step.model);
    diag.iterations = iter + 1;
    const std::size_t len = diag.loglik_trace.size();
    if (len >= 2 && converged_between(diag.loglik_trace[len - 2], diag.loglik_trace[len - 1], opts.tol)) {
      diag.converged = true;
      break;
    }
  }
  res.model = model;
  res.filter = hamilton_filter(model, data);
  res.smoothed = kim_smoother(res.filter, model.transition);
  if (!diag.loglik_trace.empty())
    diag.worst_step = std::min(diag.worst_step, res.filter.loglik - diag.loglik_trace.back());
  diag.loglik_trace.push_back(res.filter.loglik);
  diag.loglik = res.filter.loglik;
  diag.aic = model_aic(model, diag.loglik, res.filter.filtered.n_rows);
  diag.restarts_used = 1;
  return res;
}

MsVarModel initial_model(const arma::mat& data, const MsVarSpec& spec, std::uint64_t seed,
                         std::size_t index) {
  spec.validate(true);
  const Design d = build_design(data, spec.p);
  const std::size_t n = d.Y.n_rows, m = spec.m;
  const var::VarModel ols = var::fit_var(data, spec.p);

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Quantile split of the first variable: regime 0 takes the largest values.
  arma::vec share(m, arma::fill::ones);
  if (index > 0)
    for (std::size_t j = 0; j < m; ++j) share(j) += unif(rng);
  share /= arma::accu(share);
  const arma::uvec order = arma::sort_index(d.Y.col(0), "descend");
  arma::mat W(n, m, arma::fill::value(m > 1 ? 0.2 / static_cast<double>(m - 1) : 0.0));
  std::size_t pos = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t count =
        j + 1 == m ? n - pos : static_cast<std::size_t>(std::round(share(j) * static_cast<double>(n)));
    for (std::size_t c = 0; c < count && pos < n; ++c, ++pos) W(order(pos), j) = m > 1 ? 0.8 : 1.0;
  }

  const arma::mat counts = TransitionMatrix::persistent(m, 0.9).matrix();
  const arma::vec uniform(m, arma::fill::value(1.0 / static_cast<double>(m)));
  MsVarModel model = maximize(spec, d, W, counts, uniform, std::vector<arma::mat>(m, ols.sigma));
  if (index > 0) {
    const arma::vec scale = arma::sqrt(ols.sigma.diag());
    for (auto& v : model.intercepts)
      for (std::size_t i = 0; i < spec.k; ++i) v(i) += 0.25 * scale(i) * normal(rng);
  }
  return model;
}

FitResult fit(const arma::mat& data, const MsVarSpec& spec, const FitOptions& opts) {
  spec.validate();
  const std::size_t T = data.n_rows;
  if (data.n_cols != spec.k) throw Error(ErrorCode::domain, "fit: data column count differs from spec.k");
  if (T <= spec.p * spec.k + spec.m * spec.k + spec.m * spec.m)
    throw Error(ErrorCode::insufficient_data, "fit: too few observations for the specification");
  const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);

  auto run = [&](std::size_t r) -> std::optional<FitResult> {
    try {
      return fit_from(initial_model(data, spec, opts.seed, r), data, opts);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  std::vector<std::optional<FitResult>> runs(restarts);
  const std::size_t threads = std::max<std::size_t>(1, opts.threads);
  for (std::size_t begin = 0; begin < restarts; begin += threads) {
    const std::size_t end = std::min(restarts, begin + threads);
    if (threads == 1) {
      runs[begin] = run(begin);
      continue;
    }
    std::vector<std::future<std::optional<FitResult>>> futures;
    for (std::size_t r = begin; r < end; ++r) futures.push_back(std::async(std::launch::async, run, r));
    for (std::size_t r = begin; r < end; ++r) runs[r] = futures[r - begin].get();
  }

  // Deterministic selection: highest likelihood, lower index on ties.
  auto pick = [&](bool require_converged) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < restarts; ++r) {
      if (!runs[r] || (require_converged && !runs[r]->diagnostics.converged)) continue;
      if (!best || runs[r]->diagnostics.loglik > runs[*best]->diagnostics.loglik) best = r;
    }
    return best;
  };

  std::size_t failed = 0;
  double worst = 0.0;
  for (const auto& r : runs) {
    if (!r) {
      ++failed;
      continue;
    }
    worst = std::min(worst, r->diagnostics.worst_step);
  }

  auto finish = [&](std::size_t idx) {
    FitResult res = std::move(*runs[idx]);
    res.model = canonicalize(res.model);
    res.filter = hamilton_filter(res.model, data);
    res.smoothed = kim_smoother(res.filter, res.model.transition);
    res.diagnostics.restarts_used = restarts;
    res.diagnostics.restarts_failed = failed;
    res.diagnostics.best_restart = idx;
    res.diagnostics.worst_step = worst;
    return res;
  };

  if (auto best = pick(true)) return finish(*best);
  std::optional<FitResult> fallback;
  if (auto any = pick(false)) fallback = finish(*any);
  throw NonConvergenceError("no EM restart converged for " + spec.label(), std::move(fallback));
}

}  // namespace msvar::ms
