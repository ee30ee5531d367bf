#pragma once

#include <stdexcept>
#include <string>

namespace plasthom {

/// Invalid input, inconsistent dimensions, or a parameter outside its admissible range.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A solver failed to converge. Carries the time step (or -1) and the last residual.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, int step, double residual)
        : std::runtime_error(what + " (step " + std::to_string(step) + ", residual " +
                             std::to_string(residual) + ")"),
          step_(step), residual_(residual) {}

    int step() const noexcept { return step_; }
    double residual() const noexcept { return residual_; }

private:
    int step_;
    double residual_;
};

/// Wall-clock or size budget exhausted; the partially computed result is discarded.
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace plasthom
