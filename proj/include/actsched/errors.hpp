#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace actsched {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, broken model invariants, schema violations.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown: failed factorization, non-convergent eigensolve.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Conic solve ended without a usable solution.
class SolverError : public Error {
public:
    SolverError(const std::string& msg, double primal, double dual, double gap)
        : Error(msg), primal_residual(primal), dual_residual(dual), gap_residual(gap) {}
    double primal_residual;
    double dual_residual;
    double gap_residual;
};

/// Exhaustive enumeration would exceed the configured cap.
class CapExceededError : public Error {
public:
    CapExceededError(const std::string& msg, double required, std::uint64_t cap)
        : Error(msg), required_count(required), cap(cap) {}
    double required_count;  // may exceed uint64 range, hence double
    std::uint64_t cap;
};

}  // namespace actsched
