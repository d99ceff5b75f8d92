#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msvar {

enum class ErrorCode {
  schema,
  row,
  validation,
  fetch,
  alignment,
  domain,
  insufficient_data,
  degenerate_input,
  rank_deficiency,
  comparison,
  unsupported,
  density,
  filter,
  smoother,
  regime_collapse,
  non_convergence,
  ergodicity,
  infinite_duration,
  config,
  output,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Row-level CSV problem; line numbers are 1-based and include the header.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error(ErrorCode::row, "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FetchError : public Error {
 public:
  // status is 0 when no HTTP response was received.
  FetchError(int status, const std::string& what)
      : Error(ErrorCode::fetch, what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class FilterError : public Error {
 public:
  FilterError(std::size_t t, const std::string& what)
      : Error(ErrorCode::filter, "t=" + std::to_string(t) + ": " + what), t_(t) {}
  std::size_t period() const noexcept { return t_; }

 private:
  std::size_t t_;
};

}  // namespace msvar
