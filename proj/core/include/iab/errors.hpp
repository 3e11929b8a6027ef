#pragma once

#include <stdexcept>
#include <string>

namespace iab {

/// Invalid numeric argument (negative density, non-positive distance, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Segment whose endpoints coincide.
class DegenerateSegmentError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Inputs that disagree with each other (serving BS not in the BS list, ...).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Experiment or network configuration is unusable.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric that has no value for the given input (coverage with no UE).
class UndefinedCoverageError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The request is valid but deliberately refused (search space above cap).
class RefusedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iab
