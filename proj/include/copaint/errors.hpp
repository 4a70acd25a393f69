#pragma once

#include <stdexcept>
#include <string>

namespace copaint {

// Raised when a computation leaves the finite range (NaN/Inf states,
// singular solves). Callers that map errors to process exit codes treat
// this separately from precondition violations (std::invalid_argument).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace copaint
