#pragma once

#include <stdexcept>
#include <string>

namespace arborwalk {

// Raised when a walk or extension exceeds its step budget.
class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Raised when clocks are requested for a non-adjacent vertex pair.
class NonAdjacent : public std::invalid_argument {
public:
    explicit NonAdjacent(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a conditional estimate has too few conditioning events.
class InsufficientSamples : public std::runtime_error {
public:
    explicit InsufficientSamples(const std::string& what) : std::runtime_error(what) {}
};

// Raised when barrier-percolation parameters violate their validity constraints.
class ConstraintViolation : public std::invalid_argument {
public:
    explicit ConstraintViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a capacity cut collapses and the max-flow is zero.
class ZeroFlow : public std::runtime_error {
public:
    explicit ZeroFlow(const std::string& what) : std::runtime_error(what) {}
};

// Line-oriented parse failure; carries the 1-based offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

} // namespace arborwalk
