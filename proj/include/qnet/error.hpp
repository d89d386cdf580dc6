#pragma once

#include <stdexcept>
#include <string>

namespace qnet {

/// Failure categories, in the order of the CLI exit codes they map to.
enum class ErrorKind { validation = 1, invariant = 2, oracle_mismatch = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

/// Bad input: unknown site, malformed config, parameter out of range.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// A numerical invariant (trace, Hermiticity, positivity, finiteness) broke during a run.
class InvariantViolation : public Error {
public:
    InvariantViolation(const std::string& what, double time)
        : Error(ErrorKind::invariant, what + " at t=" + std::to_string(time)), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class OracleMismatch : public Error {
public:
    explicit OracleMismatch(const std::string& what) : Error(ErrorKind::oracle_mismatch, what) {}
};

}  // namespace qnet
