#pragma once

#include <stdexcept>
#include <string>

namespace dualex {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid parameter or precondition violation (CLI exit code 1).
struct ArgumentError : Error {
    using Error::Error;
};

/// File system / read / write failure (CLI exit code 2).
struct IoError : Error {
    using Error::Error;
};

/// Unreadable or unsupported image format. Treated as an I/O class failure.
struct FormatError : IoError {
    using IoError::IoError;
};

/// Iterative solver ran out of iterations (CLI exit code 3).
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double achieved_residual, int iterations_used)
        : Error(msg), residual(achieved_residual), iterations(iterations_used) {}

    double residual;
    int iterations;
};

}  // namespace dualex
