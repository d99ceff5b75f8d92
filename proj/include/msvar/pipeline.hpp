#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "msvar/data_ingest.hpp"
#include "msvar/em.hpp"
#include "msvar/error.hpp"

namespace msvar::pipeline {

using Json = nlohmann::ordered_json;

struct CandidateSpec {
  std::size_t m = 2;
  std::size_t p = 1;
  bool covariance_switching = false;
  std::string label() const;  // "2:1:msi"
};

// Parses "2:1:msi,2:2:msih". Throws ErrorCode::config.
std::vector<CandidateSpec> parse_candidates(const std::string& text);

struct PipelineConfig {
  data::DatasetConfig dataset;
  std::size_t pmax = 8;
  // Univariate fit on the first series.
  std::size_t regimes = 2;
  std::size_t lags = 2;
  bool switching_cov = false;
  // Bivariate candidates, compared by AIC.
  std::vector<CandidateSpec> candidates;
  double tolerance = 1e-8;
  std::size_t max_iter = 500;
  std::size_t restarts = 10;
  std::size_t threads = 1;
  std::uint64_t seed = 20211001;
  std::filesystem::path out = "out";
  bool refetch = false;
  bool write_svg = true;

  void validate() const;  // ErrorCode::config
  Json to_json() const;
};

enum class Stage { config, ingest, estimation, output };
const char* to_string(Stage s);
int exit_code(Stage s);
// Stage a library error belongs to when raised outside run_pipeline.
Stage stage_for(ErrorCode code);

// A stage failure. Completed sections were already written to out/results.json.
class StageError : public Error {
 public:
  StageError(Stage stage, ErrorCode code, const std::string& what)
      : Error(code, std::string("[") + to_string(stage) + "] " + what), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return pipeline::exit_code(stage_); }

 private:
  Stage stage_;
};

struct ReportBundle {
  std::string report;  // rendered text
  Json results;        // machine-readable document
  std::vector<std::filesystem::path> files;
};

// Stage-specific seed derived from the master seed and a tag.
std::uint64_t derive_seed(std::uint64_t master, const std::string& tag);

ReportBundle run_pipeline(const PipelineConfig& cfg);

// Serialises a fitted model with its analytics and probability series.
Json fit_to_json(const ms::FitResult& fit, const std::vector<Month>& periods,
                 const std::vector<std::string>& names);

}  // namespace msvar::pipeline
