#pragma once

#include <stdexcept>

namespace contactflow {

// Common base so callers can catch every library failure in one clause.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of the operation.
struct DomainError : Error { using Error::Error; };

// Iteration failed to reach the requested tolerance.
struct ConvergenceError : Error { using Error::Error; };

// Operation requires the low-temperature (multivalued) phase.
struct PhaseError : Error { using Error::Error; };

// State lies outside the admissible region of the flow or certificate.
struct RegionError : Error { using Error::Error; };

// Trajectory left the trust region (|y| or |z| too large).
struct BlowupError : Error { using Error::Error; };

// A computation produced a non-finite value.
struct OverflowError : Error { using Error::Error; };

}  // namespace contactflow
