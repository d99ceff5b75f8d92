#include "msvar/fixture.hpp"

#include <cmath>
#include <fstream>

#include "msvar/error.hpp"
#include "msvar/month.hpp"
#include "msvar/plot_data.hpp"

namespace msvar::pipeline {

ms::MsVarModel fixture_model() {
  ms::MsVarModel m;
  m.spec = {2, 2, 2, true};
  m.intercepts = {arma::vec{0.010, 0.006}, arma::vec{-0.015, -0.012}};
  m.ar = {arma::mat{{0.05, 0.02}, {0.10, 0.15}}, arma::mat{{0.03, -0.02}, {-0.05, -0.05}}};
  const auto cov = [](double s1, double s2, double rho) {
    return arma::mat{{s1 * s1, rho * s1 * s2}, {rho * s1 * s2, s2 * s2}};
  };
  m.cov = {cov(0.035, 0.07, 0.2), cov(0.06, 0.12, 0.3)};
  m.transition = ms::TransitionMatrix(arma::mat{{0.96, 0.04}, {0.17, 0.83}});
  m.initial = ms::ergodic_distribution(m.transition);
  return m;
}

std::vector<std::filesystem::path> write_fixture(const std::filesystem::path& out, std::uint64_t seed) {
  const Month first{1970, 1};
  const Month last{2021, 5};
  const std::size_t levels = static_cast<std::size_t>(last.index() - first.index() + 1);
  const ms::Simulation sim = ms::simulate(fixture_model(), levels - 1, seed);

  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::output, "cannot create " + out.string() + ": " + ec.message());

  const double start[2] = {810.78, 3.35};
  const char* names[2] = {"tsx.csv", "wti.csv"};
  std::vector<std::filesystem::path> paths;
  for (std::size_t j = 0; j < 2; ++j) {
    const auto path = out / names[j];
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::output, "cannot write " + path.string());
    f << "date,value\n";
    double log_level = std::log(start[j]);
    Month mo = first;
    for (std::size_t t = 0; t < levels; ++t, mo = mo.next()) {
      if (t > 0) log_level += sim.data(t - 1, j);
      f << mo.str() << ',' << format_number(std::exp(log_level)) << '\n';
    }
    if (!f) throw Error(ErrorCode::output, "write failed for " + path.string());
    paths.push_back(path);
  }
  return paths;
}

}  // namespace msvar::pipeline
