#pragma once

#include <vector>

#include "splitsqp/qp.hpp"

namespace splitsqp {

/// Exhaustive-enumeration solve for verification: every subset of finite
/// constraint sides is tried as a candidate active set; the subset whose
/// equality-constrained minimizer satisfies primal feasibility and dual
/// signs is the (unique) solution. Intended for tiny instances only.
template <typename Scalar>
QpSolution<Scalar> oracle_solve_qp(const QpProblem<Scalar>& qp) {
  qp.validate();
  const Index n = qp.n();

  Eigen::LLT<MatrixX<Scalar>> hchol(qp.H);
  if (hchol.info() != Eigen::Success)
    throw NotPositiveDefiniteError("QP Hessian failed Cholesky factorization");

  std::vector<ConstraintRef> sides;
  for (Index i = 0; i < qp.n_ineq(); ++i) sides.push_back({ConstraintSide::Ineq, i});
  for (Index j = 0; j < qp.n_range(); ++j) {
    if (std::isfinite(qp.lo[j])) sides.push_back({ConstraintSide::Lower, j});
    if (std::isfinite(qp.hi[j])) sides.push_back({ConstraintSide::Upper, j});
  }
  const int m = static_cast<int>(sides.size());
  if (m > 20) throw TooLargeError("oracle enumeration bound (20 constraint sides) exceeded");

  const detail::QpRows<Scalar> rows(qp);
  const Scalar gscale = Scalar(1) + qp.g.template lpNorm<Eigen::Infinity>();
  const Scalar feas_tol = [&] {
    Scalar s = 1;
    for (const auto& ref : sides) s = std::max(s, std::abs(rows.rhs(ref)));
    return Scalar(1e-9) * s;
  }();
  const Scalar dual_tol = Scalar(1e-9) * gscale;

  std::optional<QpSolution<Scalar>> best;
  Scalar best_residual = kInf<Scalar>;

  for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
    // Both sides of one range row cannot be simultaneously active (lo < hi).
    bool conflicting = false;
    for (int a = 0; a < m && !conflicting; ++a) {
      if (!(mask >> a & 1) || sides[a].side == ConstraintSide::Ineq) continue;
      for (int b = a + 1; b < m; ++b) {
        if (!(mask >> b & 1) || sides[b].side == ConstraintSide::Ineq) continue;
        if (sides[a].row == sides[b].row) {
          conflicting = true;
          break;
        }
      }
    }
    if (conflicting) continue;

    std::vector<ConstraintRef> active;
    for (int a = 0; a < m; ++a)
      if (mask >> a & 1) active.push_back(sides[a]);
    const Index na = static_cast<Index>(active.size());
    if (na > n) continue;

    VectorX<Scalar> z, nu;
    if (na == 0) {
      z = hchol.solve(-qp.g);
      nu.resize(0);
    } else {
      MatrixX<Scalar> Aw(na, n);
      VectorX<Scalar> bw(na);
      for (Index k = 0; k < na; ++k) {
        Aw.row(k) = rows.row(active[static_cast<size_t>(k)]).transpose();
        bw[k] = rows.rhs(active[static_cast<size_t>(k)]);
      }
      // KKT system of the equality-constrained subproblem, solved
      // rank-revealing so dependent-but-consistent sets still work.
      MatrixX<Scalar> kkt = MatrixX<Scalar>::Zero(n + na, n + na);
      kkt.topLeftCorner(n, n) = qp.H;
      kkt.topRightCorner(n, na) = Aw.transpose();
      kkt.bottomLeftCorner(na, n) = Aw;
      VectorX<Scalar> rhs(n + na);
      rhs.head(n) = -qp.g;
      rhs.tail(na) = bw;
      const VectorX<Scalar> sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      z = sol.head(n);
      nu = sol.tail(na);
      if ((Aw * z - bw).template lpNorm<Eigen::Infinity>() > feas_tol) continue;
    }

    if (!z.allFinite()) continue;
    if (detail::max_violation(qp, z) > feas_tol) continue;

    bool dual_ok = true;
    for (Index k = 0; k < na; ++k) {
      const Scalar eff =
          active[static_cast<size_t>(k)].side == ConstraintSide::Lower ? -nu[k] : nu[k];
      if (eff < -dual_tol) {
        dual_ok = false;
        break;
      }
    }
    if (!dual_ok) continue;

    QpSolution<Scalar> cand;
    cand.z = z;
    cand.mu = VectorX<Scalar>::Zero(qp.n_ineq());
    cand.alpha = VectorX<Scalar>::Zero(qp.n_range());
    cand.gamma = VectorX<Scalar>::Zero(qp.n_range());
    for (Index k = 0; k < na; ++k) {
      const auto& ref = active[static_cast<size_t>(k)];
      switch (ref.side) {
        case ConstraintSide::Ineq:
          cand.mu[ref.row] = nu[k];
          cand.active.ineq.push_back(ref.row);
          break;
        case ConstraintSide::Lower:
          cand.alpha[ref.row] = -nu[k];
          cand.active.lower.push_back(ref.row);
          break;
        default:
          cand.gamma[ref.row] = nu[k];
          cand.active.upper.push_back(ref.row);
      }
    }
    cand.iterations = static_cast<int>(mask);

    const Scalar resid = qp_stationarity_residual(qp, cand);
    if (resid < best_residual) {
      best_residual = resid;
      best = std::move(cand);
    }
  }

  if (!best) throw InfeasibleError("no candidate active set satisfies the optimality system");
  return *best;
}

}  // namespace splitsqp
