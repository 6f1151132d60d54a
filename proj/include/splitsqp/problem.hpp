#pragma once

#include <functional>
#include <utility>

#include "splitsqp/types.hpp"

namespace splitsqp {

/// Two-block problem data:
///
///   min  f(x) + theta(y)
///   s.t. A x + B y - b  = 0
///        E x + F y - d <= 0
///        l <= C x <= v,  s <= D y <= r
///
/// Objectives enter through callbacks; all constraints are dense matrices.
/// Range bounds may be +/-inf entry-wise; an infinite bound means that side
/// of the row is absent (it is skipped when subproblems are assembled).
template <typename Scalar>
struct TwoBlockProblem {
  using ValueFn = std::function<Scalar(const VectorX<Scalar>&)>;
  using GradFn = std::function<VectorX<Scalar>(const VectorX<Scalar>&)>;
  using HessFn = std::function<MatrixX<Scalar>(const VectorX<Scalar>&)>;

  Index n1 = 0;
  Index n2 = 0;

  ValueFn f_eval, theta_eval;
  GradFn f_grad, theta_grad;
  HessFn f_hess, theta_hess;

  MatrixX<Scalar> A, B;  // m1 x n1, m1 x n2
  VectorX<Scalar> b;     // m1

  MatrixX<Scalar> E, F;  // m2 x n1, m2 x n2
  VectorX<Scalar> d;     // m2

  MatrixX<Scalar> C;     // l1 x n1
  VectorX<Scalar> l, v;  // l1, entries in R ∪ {±inf}, l < v

  MatrixX<Scalar> D;     // l2 x n2
  VectorX<Scalar> s, r;  // l2

  Index m1() const { return A.rows(); }
  Index m2() const { return E.rows(); }
  Index l1() const { return C.rows(); }
  Index l2() const { return D.rows(); }

  /// Equality residual A x + B y - b (empty when m1 == 0).
  VectorX<Scalar> equality_residual(const VectorX<Scalar>& x, const VectorX<Scalar>& y) const {
    if (m1() == 0) return VectorX<Scalar>(0);
    return A * x + B * y - b;
  }

  /// Joint inequality value h = E x + F y - d (feasible iff h <= 0).
  VectorX<Scalar> inequality_value(const VectorX<Scalar>& x, const VectorX<Scalar>& y) const {
    if (m2() == 0) return VectorX<Scalar>(0);
    return E * x + F * y - d;
  }

  void validate() const {
    auto require = [](bool ok, const char* msg) {
      if (!ok) throw std::invalid_argument(msg);
    };
    require(n1 >= 0 && n2 >= 0, "negative block dimension");
    require(A.cols() == n1 || A.size() == 0, "A column count != n1");
    require(B.cols() == n2 || B.size() == 0, "B column count != n2");
    require(A.rows() == B.rows() && A.rows() == b.size(), "equality block dimensions disagree");
    require(E.cols() == n1 || E.size() == 0, "E column count != n1");
    require(F.cols() == n2 || F.size() == 0, "F column count != n2");
    require(E.rows() == F.rows() && E.rows() == d.size(), "inequality block dimensions disagree");
    require(C.cols() == n1 || C.size() == 0, "C column count != n1");
    require(C.rows() == l.size() && C.rows() == v.size(), "x-range dimensions disagree");
    require(D.cols() == n2 || D.size() == 0, "D column count != n2");
    require(D.rows() == s.size() && D.rows() == r.size(), "y-range dimensions disagree");
    for (Index i = 0; i < l.size(); ++i) require(l[i] < v[i], "range bounds need l < v");
    for (Index j = 0; j < s.size(); ++j) require(s[j] < r[j], "range bounds need s < r");
  }
};

/// Constraint-violation summary at a point. All violation fields are >= 0;
/// h is returned as-is (possibly positive).
template <typename Scalar>
struct FeasibilityReport {
  Scalar eq_residual_inf = 0;  // ||A x + B y - b||_inf
  Scalar ineq_violation = 0;   // max(0, max_i h_i)
  Scalar range_violation = 0;  // worst violation of the C/D ranges
  VectorX<Scalar> h;           // E x + F y - d
};

namespace detail {

template <typename Scalar>
Scalar range_violation_of(const MatrixX<Scalar>& M, const VectorX<Scalar>& lower,
                          const VectorX<Scalar>& upper, const VectorX<Scalar>& z) {
  Scalar worst = 0;
  if (M.rows() == 0) return worst;
  const VectorX<Scalar> Mz = M * z;
  for (Index i = 0; i < M.rows(); ++i) {
    if (std::isfinite(lower[i])) worst = std::max(worst, lower[i] - Mz[i]);
    if (std::isfinite(upper[i])) worst = std::max(worst, Mz[i] - upper[i]);
  }
  return worst;
}

}  // namespace detail

/// f(x) + theta(y). Throws EvalError naming the offending block if a
/// callback yields a non-finite value.
template <typename Scalar, typename DX, typename DY>
Scalar eval_objective(const TwoBlockProblem<Scalar>& p, const Eigen::MatrixBase<DX>& x,
                      const Eigen::MatrixBase<DY>& y) {
  const Scalar fx = p.f_eval ? p.f_eval(x) : Scalar(0);
  if (!std::isfinite(fx)) throw EvalError("f", "objective block f returned a non-finite value");
  const Scalar ty = p.theta_eval ? p.theta_eval(y) : Scalar(0);
  if (!std::isfinite(ty))
    throw EvalError("theta", "objective block theta returned a non-finite value");
  return fx + ty;
}

template <typename Scalar>
Scalar eval_objective(const TwoBlockProblem<Scalar>& p, const Point<Scalar>& u) {
  return eval_objective(p, u.x, u.y);
}

/// Total on finite input: residuals of all three constraint groups, with
/// infinite range bounds never counted as violated.
template <typename Scalar, typename DX, typename DY>
FeasibilityReport<Scalar> measure_feasibility(const TwoBlockProblem<Scalar>& p,
                                              const Eigen::MatrixBase<DX>& x,
                                              const Eigen::MatrixBase<DY>& y) {
  const VectorX<Scalar> xv = x;
  const VectorX<Scalar> yv = y;
  FeasibilityReport<Scalar> rep;
  if (p.m1() > 0)
    rep.eq_residual_inf = p.equality_residual(xv, yv).template lpNorm<Eigen::Infinity>();
  rep.h = p.inequality_value(xv, yv);
  rep.ineq_violation = rep.h.size() > 0 ? std::max(Scalar(0), rep.h.maxCoeff()) : Scalar(0);
  rep.range_violation = std::max(detail::range_violation_of(p.C, p.l, p.v, xv),
                                 detail::range_violation_of(p.D, p.s, p.r, yv));
  return rep;
}

template <typename Scalar>
FeasibilityReport<Scalar> measure_feasibility(const TwoBlockProblem<Scalar>& p,
                                              const Point<Scalar>& u) {
  return measure_feasibility(p, u.x, u.y);
}

/// Membership in F_+ (inequalities and ranges only; equalities are not checked).
template <typename Scalar, typename DX, typename DY>
bool is_partially_feasible(const TwoBlockProblem<Scalar>& p, const Eigen::MatrixBase<DX>& x,
                           const Eigen::MatrixBase<DY>& y, Scalar tol) {
  const auto rep = measure_feasibility(p, x, y);
  return rep.ineq_violation <= tol && rep.range_violation <= tol;
}

template <typename Scalar>
bool is_partially_feasible(const TwoBlockProblem<Scalar>& p, const Point<Scalar>& u, Scalar tol) {
  return is_partially_feasible(p, u.x, u.y, tol);
}

}  // namespace splitsqp
