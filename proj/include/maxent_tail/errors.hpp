#pragma once

#include <stdexcept>
#include <string>

namespace maxent_tail {

/// Base of every error raised by the library. Anything deriving from this maps
/// to CLI exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Root finder was handed an interval without a sign change.
class BracketError : public Error {
public:
    using Error::Error;
};

/// Iterative kernel exhausted its budget.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Constraint set admits no density of the requested family.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Caller-supplied configuration violates a construction precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Characteristic-function inversion failed its normalization check.
class InversionError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace maxent_tail
