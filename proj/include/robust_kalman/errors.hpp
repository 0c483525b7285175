#pragma once

#include <stdexcept>
#include <string>

namespace robust_kalman {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition on an operation's inputs was violated (dimension
/// mismatch, parameter out of range, non-PSD covariance, ...).
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what) : Error(what) {}
};

/// A matrix that must be inverted is numerically singular. The message
/// names the offending matrix.
class SingularMatrixError : public Error {
public:
    explicit SingularMatrixError(const std::string& what) : Error(what) {}
};

/// Too few samples for an estimation routine.
class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& what) : Error(what) {}
};

/// EM collapsed all responsibility onto a single component.
class DegenerateFitError : public Error {
public:
    explicit DegenerateFitError(const std::string& what) : Error(what) {}
};

/// A filter iteration produced a non-finite intermediate.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(what) {}
};

/// Output file could not be written.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace robust_kalman
