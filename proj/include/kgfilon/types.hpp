#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgfilon {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an input violates a precondition (bad sizes, bad ranges).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised when a run produces NaN/Inf; carries the offending step index.
class NonFiniteState : public Error {
public:
    NonFiniteState(long step, const std::string& what)
        : Error(what), step_(step) {}
    [[nodiscard]] long step() const noexcept { return step_; }

private:
    long step_;
};

/// Raised when the fine-step reference disagrees with its RK4 cross-check.
class CrossCheckFailure : public Error {
public:
    using Error::Error;
};

}  // namespace kgfilon
