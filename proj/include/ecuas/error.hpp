#pragma once

#include <stdexcept>
#include <string>

namespace ecuas {

/// Bad input: malformed files, out-of-range values, inconsistent options.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A metric that cannot be computed for otherwise valid input
/// (single-class AUC, normalization against a zero-valued reference).
class NumericError : public std::domain_error {
 public:
  explicit NumericError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace ecuas
