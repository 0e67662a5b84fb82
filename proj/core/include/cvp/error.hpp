#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvp {

enum class ErrorKind {
    invalid_argument,
    dimension_mismatch,
    level_downcast,
    invalid_family,
    family_too_large,
    kind_mismatch,
    numerical_failure,
    invalid_budget,
    not_a_variation,
    solver_stall,
    degenerate_solution,
    construction_failed,
    shape_error,
    config_error,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace cvp
