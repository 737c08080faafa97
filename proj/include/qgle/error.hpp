#pragma once

#include <stdexcept>
#include <string>

namespace qgle {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad input: parameters outside the admitted domain, malformed configuration.
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// A computation could not meet its accuracy or stability contract.
class NumericalError : public Error {
public:
  using Error::Error;
};

}  // namespace qgle
