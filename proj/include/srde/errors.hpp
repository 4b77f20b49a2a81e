#pragma once

#include <stdexcept>
#include <string>

namespace srde {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested at a point where the quantity is singular.
class SingularInput : public Error {
 public:
  using Error::Error;
};

/// A discretisation cannot reach the requested tolerance.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class InstabilityError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class InfeasibleEpsilon : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised by validate_or_throw; carries the violated inequality and where.
class ValidationError : public Error {
 public:
  ValidationError(std::string inequality, std::string location, const std::string& what)
      : Error(what), inequality_(std::move(inequality)), location_(std::move(location)) {}

  const std::string& inequality() const noexcept { return inequality_; }
  const std::string& location() const noexcept { return location_; }

 private:
  std::string inequality_;
  std::string location_;
};

}  // namespace srde
