#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fibreflow {

/// Base of every error raised by the library. The CLI maps ConfigError to
/// exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Raised when the evolving form loses positive-definiteness.
class BreakdownError : public Error {
public:
    BreakdownError(const std::string& what, double time, std::size_t index)
        : Error(what), time_(time), index_(index) {}
    double time() const noexcept { return time_; }
    std::size_t index() const noexcept { return index_; }

private:
    double time_;
    std::size_t index_;
};

class IntegrityError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace fibreflow
