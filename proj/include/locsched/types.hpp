#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace locsched {

// States never exceed four components (unicycle: x1, x2, v, theta), so the
// linear algebra uses Eigen's bounded-dynamic storage and never allocates.
constexpr int kMaxStateDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxStateDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxStateDim, kMaxStateDim>;

using CostVec = std::vector<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonStabilizable : public Error {
 public:
  using Error::Error;
};

class UnreachableWaypoint : public Error {
 public:
  UnreachableWaypoint(int index, const std::string& what) : Error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

class ControllerTimeout : public Error {
 public:
  using Error::Error;
};

class UnsupportedStructure : public Error {
 public:
  using Error::Error;
};

class InvalidPolicy : public Error {
 public:
  using Error::Error;
};

class StructuralError : public Error {
 public:
  using Error::Error;
};

class ScheduleDomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when a requested trade-off lies outside the achievable set.
/// Carries the closest achievable objective vector.
class UnachievablePoint : public Error {
 public:
  UnachievablePoint(const std::string& what, std::vector<double> nearest)
      : Error(what), nearest_(std::move(nearest)) {}
  const std::vector<double>& nearest() const { return nearest_; }

 private:
  std::vector<double> nearest_;
};

}  // namespace locsched
