#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace negrate {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs that violate a precondition (bad grid, unknown scenario, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A power function evaluated outside its real domain.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Failures of the numerics themselves (blow-up, singular denominators).
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularDenominator : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A simulated trajectory that could not be continued past `step`.
class PathFailure : public NumericalError {
public:
    enum class Kind { BlowUp, Domain };

    PathFailure(Kind kind, std::size_t step, const std::string& what)
        : NumericalError(what + " at step " + std::to_string(step)),
          kind_(kind), step_(step) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t step() const noexcept { return step_; }

private:
    Kind kind_;
    std::size_t step_;
};

}  // namespace negrate
