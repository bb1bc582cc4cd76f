#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace netrate {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Malformed input that can be traced to a specific row of a tabular source.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t row, const std::string& what)
        : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Structurally valid input that violates a data-model invariant.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (simulation parameters, CLI options, config files).
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside estimation (overflow, no events, ...).
class EstimationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Monotone likelihood: the estimating equation has no finite root.
class SeparationError : public EstimationError {
    using EstimationError::EstimationError;
};

/// A matrix that must be inverted is singular or too ill-conditioned.
class SingularMatrixError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace netrate
