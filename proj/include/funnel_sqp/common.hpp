#pragma once

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace funnel_sqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function or derivative evaluation produced NaN or an infinity.
class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

class UnknownProblem : public Error {
 public:
  explicit UnknownProblem(const std::string& name)
      : Error("unknown problem '" + name + "'") {}
};

class InconsistentRange : public Error {
 public:
  using Error::Error;
};

class RegularizationFailed : public Error {
 public:
  using Error::Error;
};

/// The active-set QP solver exceeded its pivot budget.
class MaxPivots : public Error {
 public:
  using Error::Error;
};

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
  return m.allFinite();
}

}  // namespace funnel_sqp
