#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace splitsqp {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

/// A two-block point u = (x, y).
template <typename Scalar>
struct Point {
  VectorX<Scalar> x;
  VectorX<Scalar> y;

  Index size() const { return x.size() + y.size(); }

  VectorX<Scalar> stacked() const {
    VectorX<Scalar> u(size());
    u.head(x.size()) = x;
    u.tail(y.size()) = y;
    return u;
  }
};

/// Primal iterate plus the equality multiplier, w = (x, y, lambda).
template <typename Scalar>
struct Iterate {
  VectorX<Scalar> x;
  VectorX<Scalar> y;
  VectorX<Scalar> lambda;

  Point<Scalar> point() const { return {x, y}; }
};

template <typename Scalar>
bool all_finite(const VectorX<Scalar>& v) {
  return v.allFinite();
}

/// ||H - H^T||_inf <= tol * (1 + ||H||_inf)
template <typename Scalar>
bool is_symmetric(const MatrixX<Scalar>& H, Scalar tol = Scalar(1e-12)) {
  if (H.rows() != H.cols()) return false;
  const Scalar skew = (H - H.transpose()).template lpNorm<Eigen::Infinity>();
  return skew <= tol * (Scalar(1) + H.template lpNorm<Eigen::Infinity>());
}

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A value/gradient/Hessian callback produced a non-finite result.
struct EvalError : SolveError {
  EvalError(const std::string& block_name, const std::string& what_arg)
      : SolveError(what_arg), block(block_name) {}
  std::string block;
};

struct NotPositiveDefiniteError : SolveError {
  using SolveError::SolveError;
};

struct InfeasibleError : SolveError {
  using SolveError::SolveError;
};

struct InfeasibleStartError : SolveError {
  using SolveError::SolveError;
};

struct LineSearchError : SolveError {
  using SolveError::SolveError;
};

struct TooLargeError : SolveError {
  using SolveError::SolveError;
};

struct NonsmoothError : SolveError {
  using SolveError::SolveError;
};

/// Malformed benchmark data file; carries the offending line and field.
struct DataFileError : SolveError {
  DataFileError(int line_number, const std::string& field_name, const std::string& message)
      : SolveError("line " + std::to_string(line_number) + ", field '" + field_name +
                   "': " + message),
        line(line_number),
        field(field_name) {}
  int line;
  std::string field;
};

}  // namespace splitsqp
