#pragma once

#include <stdexcept>
#include <string>

namespace fmcf {

/// Input outside the mathematical domain of an operation (s outside (0,1), R <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid curve or set geometry: too few nodes, self-intersection, inconsistent indicator.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Curve too short to be resampled at the requested spacing. The flow treats this as extinction.
class TooSmallError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Invalid command-line or config-file input.
class UsageError : public std::invalid_argument {
 public:
  UsageError(std::string key, const std::string& what)
      : std::invalid_argument(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace fmcf
