#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace complab {

// Invalid user input: malformed config, bad parameters, violated
// preconditions that the caller controls.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A point fell outside the region where a model or surface is defined.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Numerical failure during a computation (non-finite payoff, unstable step,
// unwritable output, ...).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Raised when an incompleteness witness is requested for a market in which no
// singular point was found.
class NoWitnessError : public NumericalError {
  public:
    NoWitnessError()
        : NumericalError("market appears complete; no witness exists")
    {
    }
};

// Gradient failure for one asset of a Jacobian, tagged with its index.
class GradientError : public NumericalError {
  public:
    GradientError(std::size_t asset_index, const std::string& what)
        : NumericalError("asset " + std::to_string(asset_index) + ": " + what),
          asset_index_(asset_index)
    {
    }

    std::size_t asset_index() const noexcept { return asset_index_; }

  private:
    std::size_t asset_index_;
};

}  // namespace complab
