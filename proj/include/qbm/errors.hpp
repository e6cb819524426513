// Exception types shared by all qbm modules

#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

// Invalid physical parameter, malformed index set, bad config value.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Operand shapes do not agree (matrix sizes, mode counts).
class DimensionError : public DomainError {
public:
    explicit DimensionError(const std::string& what) : DomainError(what) {}
};

// A computation would lose all precision: singular covariance, truncation loss,
// failed decomposition.
class ConditioningError : public std::runtime_error {
public:
    explicit ConditioningError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qbm

#include <functional>

namespace qbm {

// Non-fatal diagnostics (e.g. an indefinite potential block). The default
// handler writes one line to stderr.
using WarningHandler = std::function<void(const std::string&)>;

// Installs `handler` and returns the previous one. Not thread-safe; install
// handlers before starting concurrent work.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

} // namespace qbm
