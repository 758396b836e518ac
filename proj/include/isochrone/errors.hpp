#pragma once

#include <stdexcept>
#include <string>

namespace isochrone {

/// Evaluation requested outside the validity box of a system or profile.
class DomainExit : public std::runtime_error {
 public:
  explicit DomainExit(const std::string& what) : std::runtime_error(what) {}
};

/// A transformation determinant fell below the invertibility threshold.
class SingularTransformation : public std::runtime_error {
 public:
  explicit SingularTransformation(const std::string& what) : std::runtime_error(what) {}
};

/// Period measurement found no section return within the time horizon.
class NoReturn : public std::runtime_error {
 public:
  explicit NoReturn(const std::string& what) : std::runtime_error(what) {}
};

class MaxStepsExceeded : public std::runtime_error {
 public:
  explicit MaxStepsExceeded(const std::string& what) : std::runtime_error(what) {}
};

class InsufficientPoints : public std::runtime_error {
 public:
  explicit InsufficientPoints(const std::string& what) : std::runtime_error(what) {}
};

class QuadratureFailure : public std::runtime_error {
 public:
  explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Construction-time validation of a spec object failed.
class InvalidSpec : public std::runtime_error {
 public:
  explicit InvalidSpec(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace isochrone
