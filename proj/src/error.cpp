#include "msvar/error.hpp"

namespace msvar {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::schema: return "schema";
    case ErrorCode::row: return "row";
    case ErrorCode::validation: return "validation";
    case ErrorCode::fetch: return "fetch";
    case ErrorCode::alignment: return "alignment";
    case ErrorCode::domain: return "domain";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::degenerate_input: return "degenerate-input";
    case ErrorCode::rank_deficiency: return "rank-deficiency";
    case ErrorCode::comparison: return "comparison";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::density: return "density";
    case ErrorCode::filter: return "filter";
    case ErrorCode::smoother: return "smoother";
    case ErrorCode::regime_collapse: return "regime-collapse";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::ergodicity: return "ergodicity";
    case ErrorCode::infinite_duration: return "infinite-duration";
    case ErrorCode::config: return "config";
    case ErrorCode::output: return "output";
  }
  return "unknown";
}

}  // namespace msvar
