#pragma once
// Error taxonomy shared by all modules. Each error carries the process exit
// code used by the CLI: 1 usage, 2 numeric failure, 3 invariant violation.

#include <stdexcept>
#include <string>

namespace bohr {

class Error : public std::runtime_error {
public:
    Error(const std::string& msg, int exit_code)
        : std::runtime_error(msg), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& m) : Error(m, 1) {}
};

struct NumericFailure : Error {
    explicit NumericFailure(const std::string& m) : Error(m, 2) {}
};

struct InvariantError : Error {
    explicit InvariantError(const std::string& m) : Error(m, 3) {}
};

// Requests exceeding configured caps are usage-level, not invariant-level.
struct CapacityError : UsageError {
    explicit CapacityError(const std::string& m) : UsageError(m) {}
};

struct InvalidObservable : InvariantError {
    explicit InvalidObservable(const std::string& m) : InvariantError(m) {}
};

struct DomainError : InvariantError {
    explicit DomainError(const std::string& m) : InvariantError(m) {}
};

struct DimensionError : InvariantError {
    explicit DimensionError(const std::string& m) : InvariantError(m) {}
};

struct InvalidMeasure : InvariantError {
    explicit InvalidMeasure(const std::string& m) : InvariantError(m) {}
};

struct NotMaximal : InvariantError {
    explicit NotMaximal(const std::string& m) : InvariantError(m) {}
};

struct IndexError : InvariantError {
    explicit IndexError(const std::string& m) : InvariantError(m) {}
};

struct InvalidSystem : InvariantError {
    explicit InvalidSystem(const std::string& m) : InvariantError(m) {}
};

struct OrderError : InvariantError {
    explicit OrderError(const std::string& m) : InvariantError(m) {}
};

struct InvalidProjection : InvariantError {
    explicit InvalidProjection(const std::string& m) : InvariantError(m) {}
};

struct UnsupportedForm : InvariantError {
    explicit UnsupportedForm(const std::string& m) : InvariantError(m) {}
};

} // namespace bohr
