#pragma once

#include <stdexcept>
#include <string>

namespace vofdg {

/// Raised when an argument or configuration violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Configuration errors carry the name of the violated constraint.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Iterations that fail to converge, singular systems, non-finite results.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A runtime diagnostic on the memory weights failed at (level, index).
class DiagnosticFailure : public std::runtime_error {
public:
    DiagnosticFailure(const std::string& what, int level, int index)
        : std::runtime_error(what), level_(level), index_(index) {}

    int level() const noexcept { return level_; }
    int index() const noexcept { return index_; }

private:
    int level_;
    int index_;
};

} // namespace vofdg
