#pragma once

#include <stdexcept>
#include <string>

namespace rscore {

/// Invalid user-supplied configuration: sizes, counts, flags.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric argument lies outside the domain of the operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A ratio estimator could not be formed. Carries the raw sums.
class EstimationError : public std::runtime_error {
 public:
  EstimationError(const std::string& what, double numerator, double denominator)
      : std::runtime_error(what), numerator_(numerator), denominator_(denominator) {}

  double numerator() const noexcept { return numerator_; }
  double denominator() const noexcept { return denominator_; }

 private:
  double numerator_;
  double denominator_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rscore
