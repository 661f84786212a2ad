#pragma once

#include <stdexcept>
#include <string>

namespace wacrisk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad dimensions, disconnected
/// graph, non-commuting gains, malformed data).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The request is well formed but has no answer: an unstable mode where
/// stationary statistics were asked for, an empty feasible gain set, a
/// diverging spectral integral.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// An iterative routine failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace wacrisk
