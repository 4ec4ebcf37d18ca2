#ifndef HDBO_ERROR_HPP
#define HDBO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hdbo {

/// Invalid arguments or configuration (bad box, out-of-range counts, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Violated call contract (length mismatch, misaligned traces, ...).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Surrogate fitting failed (Cholesky failure after jitter escalation).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite input to a numeric routine.
class NumericError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Objective evaluation failed (external process crash, timeout, bad reply).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hdbo

#endif  // HDBO_ERROR_HPP
