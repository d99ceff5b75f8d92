#include "msvar/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

namespace msvar::pipeline {

namespace {

std::string f6(const Json& v) {
  if (!v.is_number()) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v.get<double>());
  return buf;
}

std::string e6(const Json& v) {
  if (!v.is_number()) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v.get<double>());
  return buf;
}

std::string str(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "NA";
  return v.dump();
}

// Left-aligned first column, right-aligned others.
class Table {
 public:
  void header(std::vector<std::string> h) { rows_.insert(rows_.begin(), std::move(h)), has_header_ = true; }
  void row(std::vector<std::string> r) { rows_.push_back(std::move(r)); }
  void render(std::ostream& os) const {
    std::vector<std::size_t> w;
    for (const auto& r : rows_)
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (w.size() <= c) w.push_back(0);
        w[c] = std::max(w[c], r[c].size());
      }
    std::size_t total = 0;
    for (auto x : w) total += x + 2;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      std::string line;
      for (std::size_t c = 0; c < r.size(); ++c) {
        const std::size_t pad = w[c] - r[c].size();
        if (c == 0) {
          line += r[c] + std::string(pad, ' ');
        } else {
          line += "  " + std::string(pad, ' ') + r[c];
        }
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      os << "  " << line << '\n';
      if (i == 0 && has_header_) os << "  " << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
  bool has_header_ = false;
};

void title(std::ostream& os, const std::string& t) { os << '\n' << t << '\n' << std::string(t.size(), '=') << '\n'; }

void summary_panel(std::ostream& os, const std::string& label, const Json& panel, const Json& vars) {
  os << label << '\n';
  Table t;
  std::vector<std::string> h{""};
  for (const auto& v : vars) h.push_back(v.get<std::string>());
  t.header(h);
  const std::pair<const char*, const char*> fields[] = {
      {"Mean", "mean"},           {"Median", "median"},         {"Maximum", "maximum"},
      {"Minimum", "minimum"},     {"Standard Deviation", "std_dev"}, {"Skewness", "skewness"},
      {"Kurtosis", "kurtosis"},   {"Excess kurtosis", "excess_kurtosis"}, {"Jarque-Bera", "jarque_bera"},
      {"JB p-value", "jarque_bera_p"}};
  for (const auto& [name, key] : fields) {
    std::vector<std::string> r{name};
    for (const auto& v : vars) r.push_back(f6(panel[v.get<std::string>()][key]));
    t.row(r);
  }
  std::vector<std::string> r{"Observations"};
  for (const auto& v : vars) r.push_back(str(panel[v.get<std::string>()]["count"]));
  t.row(r);
  t.render(os);
}

void unit_root_block(std::ostream& os, const Json& rows) {
  Table t;
  t.header({"Series", "Test", "Det", "Statistic", "(p-value)", "Lags", "CV 10%", "CV 5%", "CV 1%", "Decision 5%"});
  for (const auto& r : rows) {
    const bool kpss = r["test"] == "KPSS";
    const std::string decision = r["reject_5"].get<bool>() ? (kpss ? "stationarity rejected" : "unit root rejected")
                                                           : "not rejected";
    t.row({str(r["series"]), str(r["test"]), str(r["deterministic"]), f6(r["statistic"]),
           r["p_value"].is_number() ? "(" + f6(r["p_value"]) + ")" : "", str(r["lags"]), f6(r["critical"]["10%"]),
           f6(r["critical"]["5%"]), f6(r["critical"]["1%"]), decision});
  }
  t.render(os);
}

void ms_coefficients(std::ostream& os, const Json& fit) {
  const Json& vars = fit["variables"];
  const std::size_t k = vars.size(), m = fit["spec"]["m"], p = fit["spec"]["p"];
  Table t;
  std::vector<std::string> h{""};
  for (const auto& v : vars) h.push_back(v.get<std::string>());
  t.header(h);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::string> r{"Const (Regime " + std::to_string(j + 1) + ")"};
    for (std::size_t i = 0; i < k; ++i) r.push_back(f6(fit["intercepts"][j][i]));
    t.row(r);
  }
  for (std::size_t l = 0; l < p; ++l)
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::string> r{vars[c].get<std::string>() + "(t-" + std::to_string(l + 1) + ")"};
      for (std::size_t i = 0; i < k; ++i) r.push_back(f6(fit["ar"][l][i][c]));
      t.row(r);
    }
  const bool sw = fit["spec"]["covariance_switching"];
  for (std::size_t j = 0; j < (sw ? m : 1); ++j) {
    std::vector<std::string> r{sw ? "Std dev (Regime " + std::to_string(j + 1) + ")" : "Std dev"};
    for (std::size_t i = 0; i < k; ++i) {
      const Json& v = fit["cov"][j][i][i];
      r.push_back(v.is_number() ? f6(Json(std::sqrt(v.get<double>()))) : "NA");
    }
    t.row(r);
  }
  if (k >= 2)
    for (std::size_t j = 0; j < (sw ? m : 1); ++j)
      t.row({sw ? "Correlation (Regime " + std::to_string(j + 1) + ")" : "Correlation", f6(fit["correlation"][j]), ""});
  t.render(os);
  os << "  Coefficient rows give the effect of the lagged variable on each column's equation.\n";
  os << "  Log-likelihood " << f6(fit["loglik"]) << ", AIC " << f6(fit["aic"]) << ", parameters "
     << str(fit["parameters"]) << ", observations " << str(fit["nobs"]) << ".\n";
  os << "  Point estimates only; standard errors and p-values are not computed.\n";
}

void transition_block(std::ostream& os, const Json& fit) {
  const std::size_t m = fit["spec"]["m"];
  Table t;
  std::vector<std::string> h{""};
  for (std::size_t j = 0; j < m; ++j) h.push_back("Regime " + std::to_string(j + 1));
  h.push_back("Row sum");
  t.header(h);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::string> r{"Regime " + std::to_string(i + 1)};
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      r.push_back(f6(fit["transition"][i][j]));
      sum += fit["transition"][i][j].get<double>();
    }
    r.push_back(f6(Json(sum)));
    t.row(r);
  }
  t.render(os);
  os << "  Entry (i, j) is the probability of moving from regime i to regime j.\n\n";
  Table a;
  a.header({"", "Ergodic prob.", "Expected duration", "Periods classified", "Initial prob."});
  for (std::size_t j = 0; j < m; ++j)
    a.row({"Regime " + std::to_string(j + 1), f6(fit["ergodic"].is_array() ? fit["ergodic"][j] : Json()),
           f6(fit["expected_duration"].is_array() ? fit["expected_duration"][j] : Json()),
           str(fit["regime_counts"][j]), f6(fit["initial"][j])});
  a.render(os);
}

}  // namespace

std::string render_tables(const Json& doc) {
  std::ostringstream os;
  const Json& data = doc["data"];
  const Json& vars = data["variables"];
  const Json& periods = data["periods"];

  os << "Regime-switching analysis report\n";
  os << "Variables: " << vars[0].get<std::string>() << ", " << vars[1].get<std::string>() << '\n';
  os << "Sample: " << str(periods.front()) << " to " << str(periods.back()) << " (" << periods.size() << " levels, "
     << data["return_periods"].size() << " returns)\n";
  os << "Master seed: " << str(doc["provenance"]["seed"]) << '\n';
  os << "Inputs:\n";
  for (const auto& in : doc["provenance"]["inputs"])
    os << "  " << str(in["name"]) << "  " << str(in["source"]) << "  sha256 " << str(in["sha256"]) << '\n';

  title(os, "Table 3. Summary statistics");
  summary_panel(os, "Panel A1: levels (raw units)", doc["descriptive"]["levels"], vars);
  os << '\n';
  summary_panel(os, "Panel A2: natural log levels", doc["descriptive"]["log_levels"], vars);
  os << '\n';
  summary_panel(os, "Panel B: log returns", doc["descriptive"]["returns"], vars);
  os << "  Kurtosis is raw (normal = 3); excess kurtosis subtracts 3.\n";

  title(os, "Table 4. Unit root tests");
  os << "Panel A: natural log levels\n";
  unit_root_block(os, doc["unit_root"]["levels"]);
  os << "Panel B: log returns\n";
  unit_root_block(os, doc["unit_root"]["returns"]);
  os << "  Values in parentheses are p-values. KPSS tests the null of stationarity.\n";

  {
    const Json& ls = doc["lag_selection"];
    title(os, "Table 5. VAR lag order selection");
    os << "Returns, common sample T = " << str(ls["T"]) << '\n';
    Table t;
    t.header({"Lag", "LogL", "LR", "(p-value)", "FPE", "AIC", "SC", "HQ"});
    const Json& sel = ls["selected"];
    for (const auto& r : ls["rows"]) {
      const std::size_t lag = r["lag"];
      auto star = [&](const char* key) { return sel[key].get<std::size_t>() == lag ? "*" : " "; };
      t.row({str(r["lag"]), f6(r["loglik"]), r["lr"].is_number() ? f6(r["lr"]) + star("lr") : "NA ",
             r["lr_p"].is_number() ? "(" + f6(r["lr_p"]) + ")" : "", e6(r["fpe"]) + star("fpe"),
             f6(r["aic"]) + star("aic"), f6(r["sc"]) + star("sc"), f6(r["hq"]) + star("hq")});
    }
    t.render(os);
    os << "  * marks the lag selected by each criterion; LR is the small-sample modified statistic, selected at 5%.\n";
  }

  {
    const Json& jo = doc["johansen"];
    title(os, "Table 6. Johansen cointegration test");
    os << "Log levels, VAR(" << str(jo["lags"]) << ") in levels, deterministic: " << str(jo["deterministic"])
       << ", T = " << str(jo["nobs"]) << '\n';
    os << "Eigenvalues:";
    for (const auto& e : jo["eigenvalues"]) os << ' ' << f6(e);
    os << '\n';
    for (const auto& [panel, key, cv, refcv] :
         {std::tuple{"Panel A: Trace test", "trace", "trace_cv", "reference_trace_cv"},
          std::tuple{"Panel B: Maximum eigenvalue", "max_eig", "max_eig_cv", "reference_max_eig_cv"}}) {
      os << panel << '\n';
      Table t;
      t.header({"", "Statistic", "CV 10%", "CV 5%", "CV 1%", "Reject 5%", "Ref 10%", "Ref 5%", "Ref 1%"});
      for (const auto& r : jo["ranks"]) {
        const std::size_t rank = r["r"];
        const std::string h = rank == 0 ? "r = 0" : "r <= " + std::to_string(rank);
        const bool rej = r[std::string(key) + "_reject_5"];
        const Json& ref = r[refcv];
        t.row({h, f6(r[key]), f6(r[cv]["10%"]), f6(r[cv]["5%"]), f6(r[cv]["1%"]), rej ? "yes" : "no",
               ref.is_object() ? f6(ref["10%"]) : "", ref.is_object() ? f6(ref["5%"]) : "",
               ref.is_object() ? f6(ref["1%"]) : ""});
      }
      t.render(os);
    }
    os << "  Decisions use the standard critical values; the Ref columns are shown for comparison only.\n";
    os << "  Rank at 5%: trace " << str(jo["trace_rank_5"]) << ", maximum eigenvalue " << str(jo["max_eig_rank_5"])
       << ".\n";
  }

  const Json& uni = doc["ms_univariate"];
  title(os, "Table 7. " + str(uni["spec"]["label"]) + " of " + str(uni["variables"][0]) + " returns");
  ms_coefficients(os, uni);

  title(os, "Table 8. Transition probabilities, " + str(uni["spec"]["label"]) + " (" + str(uni["variables"][0]) + ")");
  transition_block(os, uni);

  const Json& bi = doc["ms_bivariate"];
  title(os, "Model comparison (bivariate candidates)");
  {
    Table t;
    t.header({"Candidate", "LogL", "AIC", "Parameters", "Converged", "Selected"});
    for (const auto& c : bi["candidates"]) {
      const std::string label = str(c["label"]);
      t.row({label, f6(c.value("loglik", Json())), f6(c.value("aic", Json())), str(c.value("parameters", Json())),
             c["converged"].get<bool>() ? "yes" : "no", label == str(bi["selected"]) ? "*" : ""});
    }
    t.render(os);
    for (const auto& c : bi["candidates"])
      if (c.contains("error")) os << "  " << str(c["label"]) << ": " << str(c["error"]) << '\n';
    os << "  * marks the AIC minimum among converged candidates.\n";
  }

  const Json& bf = bi["fit"];
  title(os, "Table 9. " + str(bf["spec"]["label"]) + " of " + str(vars[0]) + " and " + str(vars[1]) + " returns");
  ms_coefficients(os, bf);

  title(os, "Table 10. Transition probabilities, " + str(bf["spec"]["label"]) + " (bivariate)");
  transition_block(os, bf);

  title(os, "Estimation diagnostics");
  {
    Table t;
    t.header({"Model", "Iterations", "Converged", "Final change", "Restarts", "Failed", "Best restart",
              "Worst step"});
    for (const Json* f : {&uni, &bf}) {
      const Json& d = (*f)["diagnostics"];
      t.row({str((*f)["spec"]["label"]), str(d["iterations"]), d["converged"].get<bool>() ? "yes" : "no",
             e6(d["final_change_norm"]), str(d["restarts_used"]), str(d["restarts_failed"]), str(d["best_restart"]),
             e6(d["worst_step"])});
    }
    t.render(os);
  }

  title(os, "Discrepancy flags");
  for (const auto& f : doc["flags"]) {
    os << "[" << str(f["status"]) << "] " << str(f["id"]) << '\n';
    os << "    reference: " << str(f["reference"]) << '\n';
    os << "    observed:  " << str(f["observed"]) << '\n';
  }
  return os.str();
}

}  // namespace msvar::pipeline
