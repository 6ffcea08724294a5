#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmx {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure did not reach its requested tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double residual_estimate)
        : std::runtime_error(what + " (residual estimate " + std::to_string(residual_estimate) + ")"),
          residual_(residual_estimate) {}

    [[nodiscard]] double residual_estimate() const noexcept { return residual_; }

private:
    double residual_;
};

/// Non-finite value produced while time stepping.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Malformed scenario input.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario input that parses but violates a model constraint.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fmx
