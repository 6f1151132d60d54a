#pragma once

#include "splitsqp/problem.hpp"
#include "splitsqp/qp.hpp"
#include "splitsqp/types.hpp"

namespace splitsqp {

/// Merit function context: L_beta(x, y, lambda) =
///   f(x) + theta(y) - lambda^T (A x + B y - b) + beta/2 ||A x + B y - b||^2.
template <typename Scalar>
struct AlfContext {
  const TwoBlockProblem<Scalar>* problem = nullptr;
  Scalar beta = 1;
  VectorX<Scalar> lambda;
};

template <typename Scalar>
Scalar alf_value(const AlfContext<Scalar>& ctx, const VectorX<Scalar>& x,
                 const VectorX<Scalar>& y) {
  const auto& p = *ctx.problem;
  Scalar value = eval_objective(p, x, y);
  if (p.m1() > 0) {
    const VectorX<Scalar> res = p.equality_residual(x, y);
    value += -ctx.lambda.dot(res) + Scalar(0.5) * ctx.beta * res.squaredNorm();
  }
  return value;
}

template <typename Scalar>
Scalar alf_value(const AlfContext<Scalar>& ctx, const Point<Scalar>& u) {
  return alf_value(ctx, u.x, u.y);
}

/// Stacked gradient in u = (x, y):
///   ( grad f(x)     - A^T [lambda - beta (A x + B y - b)]
///     grad theta(y) - B^T [lambda - beta (A x + B y - b)] )
template <typename Scalar>
VectorX<Scalar> alf_gradient(const AlfContext<Scalar>& ctx, const VectorX<Scalar>& x,
                             const VectorX<Scalar>& y) {
  const auto& p = *ctx.problem;
  VectorX<Scalar> gx = p.f_grad(x);
  VectorX<Scalar> gy = p.theta_grad(y);
  if (!all_finite(gx)) throw EvalError("f", "gradient of f returned a non-finite value");
  if (!all_finite(gy)) throw EvalError("theta", "gradient of theta returned a non-finite value");
  if (p.m1() > 0) {
    const VectorX<Scalar> shifted = ctx.lambda - ctx.beta * p.equality_residual(x, y);
    gx.noalias() -= p.A.transpose() * shifted;
    gy.noalias() -= p.B.transpose() * shifted;
  }
  VectorX<Scalar> g(x.size() + y.size());
  g.head(x.size()) = gx;
  g.tail(y.size()) = gy;
  return g;
}

/// Curvature blocks of the quadratic models. Hx/Hy approximate the objective
/// Hessians; calHx = Hx + beta A^T A and calHy = Hy + beta B^T B carry the
/// penalty curvature.
template <typename Scalar>
struct HessianBlocks {
  MatrixX<Scalar> Hx, Hy;
  MatrixX<Scalar> calHx, calHy;
};

template <typename Scalar>
HessianBlocks<Scalar> make_hessian_blocks(const TwoBlockProblem<Scalar>& p, MatrixX<Scalar> Hx,
                                          MatrixX<Scalar> Hy, Scalar beta) {
  HessianBlocks<Scalar> blocks;
  blocks.calHx = Hx;
  blocks.calHy = Hy;
  if (p.m1() > 0) {
    blocks.calHx.noalias() += beta * p.A.transpose() * p.A;
    blocks.calHy.noalias() += beta * p.B.transpose() * p.B;
  }
  blocks.Hx = std::move(Hx);
  blocks.Hy = std::move(Hy);
  return blocks;
}

/// Coupled matrix [calHx, beta A^T B; beta B^T A, calHy].
template <typename Scalar>
MatrixX<Scalar> coupled_hessian(const TwoBlockProblem<Scalar>& p,
                                const HessianBlocks<Scalar>& blocks, Scalar beta) {
  const Index n1 = blocks.calHx.rows();
  const Index n2 = blocks.calHy.rows();
  MatrixX<Scalar> H = MatrixX<Scalar>::Zero(n1 + n2, n1 + n2);
  H.topLeftCorner(n1, n1) = blocks.calHx;
  H.bottomRightCorner(n2, n2) = blocks.calHy;
  if (p.m1() > 0) {
    H.topRightCorner(n1, n2).noalias() = beta * p.A.transpose() * p.B;
    H.bottomLeftCorner(n2, n1) = H.topRightCorner(n1, n2).transpose();
  }
  return H;
}

/// Per-iteration inputs the subproblem builders consume. h must already be
/// clamped to <= 0 (small positive roundoff zeroed by the caller).
template <typename Scalar>
struct SqpStepData {
  VectorX<Scalar> x, y, lambda;
  VectorX<Scalar> grad_f, grad_theta;
  VectorX<Scalar> eq_residual;  // A x + B y - b
  VectorX<Scalar> h;            // E x + F y - d, clamped to <= 0
  HessianBlocks<Scalar> hess;
  Scalar beta = 1;

  /// lambda - beta * (A x + B y - b); empty when m1 == 0.
  VectorX<Scalar> shifted_multiplier() const {
    if (lambda.size() == 0) return lambda;
    return lambda - beta * eq_residual;
  }
};

/// x-block subproblem in the absolute variable x:
///   min  1/2 x^T calHx x + gq^T x
///   s.t. E x <= d - F y_k + (c/2) h_k,  l <= C x <= v
/// with gq chosen so the QP gradient at x_k equals the x-part of the ALF
/// gradient. x_k is feasible for the returned QP whenever h_k <= 0.
template <typename Scalar>
QpProblem<Scalar> build_split_x_qp(const TwoBlockProblem<Scalar>& p,
                                   const SqpStepData<Scalar>& step, Scalar c) {
  QpProblem<Scalar> qp;
  qp.H = step.hess.calHx;
  qp.g = step.grad_f - qp.H * step.x;
  if (p.m1() > 0) qp.g.noalias() -= p.A.transpose() * step.shifted_multiplier();
  if (p.m2() > 0) {
    qp.G = p.E;
    qp.h = p.d - p.F * step.y + (c / Scalar(2)) * step.h;
  } else {
    qp.G.resize(0, p.n1);
    qp.h.resize(0);
  }
  qp.R = p.C;
  qp.lo = p.l;
  qp.hi = p.v;
  return qp;
}

/// Mirror of build_split_x_qp for the y block (B, F, D, s, r).
template <typename Scalar>
QpProblem<Scalar> build_split_y_qp(const TwoBlockProblem<Scalar>& p,
                                   const SqpStepData<Scalar>& step, Scalar c) {
  QpProblem<Scalar> qp;
  qp.H = step.hess.calHy;
  qp.g = step.grad_theta - qp.H * step.y;
  if (p.m1() > 0) qp.g.noalias() -= p.B.transpose() * step.shifted_multiplier();
  if (p.m2() > 0) {
    qp.G = p.F;
    qp.h = p.d - p.E * step.x + (c / Scalar(2)) * step.h;
  } else {
    qp.G.resize(0, p.n2);
    qp.h.resize(0);
  }
  qp.R = p.D;
  qp.lo = p.s;
  qp.hi = p.r;
  return qp;
}

/// Coupled subproblem in the stacked variable z = (x, y): quadratic model of
/// the ALF over the original inequality/range set (no contraction term).
template <typename Scalar>
QpProblem<Scalar> build_coupled_qp(const TwoBlockProblem<Scalar>& p,
                                   const SqpStepData<Scalar>& step) {
  const Index n1 = p.n1;
  const Index n2 = p.n2;
  QpProblem<Scalar> qp;
  qp.H = coupled_hessian(p, step.hess, step.beta);

  qp.g.resize(n1 + n2);
  qp.g.head(n1) = step.grad_f - step.hess.Hx * step.x;
  qp.g.tail(n2) = step.grad_theta - step.hess.Hy * step.y;
  if (p.m1() > 0) {
    qp.g.head(n1).noalias() -= p.A.transpose() * (step.lambda + step.beta * p.b);
    qp.g.tail(n2).noalias() -= p.B.transpose() * (step.lambda + step.beta * p.b);
  }

  if (p.m2() > 0) {
    qp.G.resize(p.m2(), n1 + n2);
    qp.G.leftCols(n1) = p.E;
    qp.G.rightCols(n2) = p.F;
    qp.h = p.d;
  } else {
    qp.G.resize(0, n1 + n2);
    qp.h.resize(0);
  }

  qp.R = MatrixX<Scalar>::Zero(p.l1() + p.l2(), n1 + n2);
  qp.R.topLeftCorner(p.l1(), n1) = p.C;
  qp.R.bottomRightCorner(p.l2(), n2) = p.D;
  qp.lo.resize(p.l1() + p.l2());
  qp.hi.resize(p.l1() + p.l2());
  qp.lo.head(p.l1()) = p.l;
  qp.lo.tail(p.l2()) = p.s;
  qp.hi.head(p.l1()) = p.v;
  qp.hi.tail(p.l2()) = p.r;
  return qp;
}

}  // namespace splitsqp
