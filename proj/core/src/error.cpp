#include "lrp/error.hpp"

namespace lrp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_distance: return "invalid_distance";
    case ErrorCode::empty_window: return "empty_window";
    case ErrorCode::truncation: return "truncation";
    case ErrorCode::invalid_query: return "invalid_query";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::invalid_scale: return "invalid_scale";
    case ErrorCode::invalid_flow: return "invalid_flow";
    case ErrorCode::lift_infeasible: return "lift_infeasible";
    case ErrorCode::certificate_invalid: return "certificate_invalid";
    case ErrorCode::too_large: return "too_large";
    case ErrorCode::invalid_data: return "invalid_data";
    case ErrorCode::plot_refused: return "plot_refused";
    case ErrorCode::parse: return "parse";
  }
  return "unknown";
}

}  // namespace lrp
