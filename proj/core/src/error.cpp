#include "cvp/error.hpp"

namespace cvp {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid argument";
        case ErrorKind::dimension_mismatch: return "dimension mismatch";
        case ErrorKind::level_downcast: return "level downcast";
        case ErrorKind::invalid_family: return "invalid family";
        case ErrorKind::family_too_large: return "family too large";
        case ErrorKind::kind_mismatch: return "kernel kind mismatch";
        case ErrorKind::numerical_failure: return "numerical failure";
        case ErrorKind::invalid_budget: return "invalid budget";
        case ErrorKind::not_a_variation: return "not a variation of finite volume";
        case ErrorKind::solver_stall: return "solver stall";
        case ErrorKind::degenerate_solution: return "degenerate solution";
        case ErrorKind::construction_failed: return "construction failed";
        case ErrorKind::shape_error: return "shape error";
        case ErrorKind::config_error: return "config error";
    }
    return "unknown";
}

}  // namespace cvp
