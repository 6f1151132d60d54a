#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "splitsqp/types.hpp"

namespace splitsqp {

/// Strictly convex quadratic program
///
///   min  1/2 z^T H z + g^T z
///   s.t. G z <= h
///        lo <= R z <= hi
///
/// H must be symmetric positive definite (checked via Cholesky). Range
/// bounds may be +/-inf; an infinite bound disables that side of the row.
template <typename Scalar>
struct QpProblem {
  MatrixX<Scalar> H;
  VectorX<Scalar> g;
  MatrixX<Scalar> G;
  VectorX<Scalar> h;
  MatrixX<Scalar> R;
  VectorX<Scalar> lo, hi;

  Index n() const { return H.rows(); }
  Index n_ineq() const { return G.rows(); }
  Index n_range() const { return R.rows(); }

  void validate() const {
    auto require = [](bool ok, const char* msg) {
      if (!ok) throw std::invalid_argument(msg);
    };
    require(H.rows() == H.cols() && H.rows() == g.size(), "H/g dimensions disagree");
    require(G.rows() == h.size(), "G/h dimensions disagree");
    require(G.rows() == 0 || G.cols() == n(), "G column count != n");
    require(R.rows() == lo.size() && R.rows() == hi.size(), "R/lo/hi dimensions disagree");
    require(R.rows() == 0 || R.cols() == n(), "R column count != n");
    for (Index j = 0; j < R.rows(); ++j) require(lo[j] < hi[j], "range bounds need lo < hi");
  }
};

/// One side of one constraint. Ordering ids (used for deterministic
/// tie-breaking and warm starts): G rows first, then per range row the
/// lower side followed by the upper side.
enum class ConstraintSide { Ineq, Lower, Upper };

struct ConstraintRef {
  ConstraintSide side;
  Index row;

  friend bool operator==(const ConstraintRef&, const ConstraintRef&) = default;
};

inline Index constraint_id(const ConstraintRef& ref, Index n_ineq) {
  switch (ref.side) {
    case ConstraintSide::Ineq:
      return ref.row;
    case ConstraintSide::Lower:
      return n_ineq + 2 * ref.row;
    default:
      return n_ineq + 2 * ref.row + 1;
  }
}

/// Index lists of the constraints active at the solution.
struct ActiveSet {
  std::vector<Index> ineq;
  std::vector<Index> lower;
  std::vector<Index> upper;

  std::vector<ConstraintRef> refs() const {
    std::vector<ConstraintRef> out;
    out.reserve(ineq.size() + lower.size() + upper.size());
    for (Index i : ineq) out.push_back({ConstraintSide::Ineq, i});
    for (Index j : lower) out.push_back({ConstraintSide::Lower, j});
    for (Index j : upper) out.push_back({ConstraintSide::Upper, j});
    return out;
  }
};

/// Minimizer plus full dual information. mu pairs with the G rows, alpha
/// with active lower range bounds, gamma with active upper range bounds.
/// `active` lists everything geometrically active at z; `working_set` is
/// the independent subset the solver ended on (the useful warm-start hint).
template <typename Scalar>
struct QpSolution {
  VectorX<Scalar> z;
  VectorX<Scalar> mu;
  VectorX<Scalar> alpha;
  VectorX<Scalar> gamma;
  ActiveSet active;
  ActiveSet working_set;
  int iterations = 0;
};

template <typename Scalar>
struct QpOptions {
  std::optional<VectorX<Scalar>> start;  // feasible start; phase-1 is run when absent
  std::optional<ActiveSet> warm_start;   // active-set hint, value-copied
  Scalar kkt_tol = Scalar(1e-9);
  int max_iterations = 0;  // 0: derived from the problem size
};

/// Active-set iteration cap was hit; `best` carries the last iterate.
template <typename Scalar>
struct CycleLimitError : SolveError {
  CycleLimitError(const std::string& msg, QpSolution<Scalar> best_so_far)
      : SolveError(msg), best(std::move(best_so_far)) {}
  QpSolution<Scalar> best;
};

namespace detail {

/// Compact row access. Constraint rows in this problem class are a few
/// nonzeros wide, so dot products and Schur-column updates run over the
/// stored entries instead of full dense rows.
template <typename Scalar>
struct QpRows {
  explicit QpRows(const QpProblem<Scalar>& problem) : qp(problem) {
    compact.reserve(static_cast<size_t>(qp.n_ineq() + qp.n_range()));
    norms.resize(static_cast<size_t>(qp.n_ineq() + qp.n_range()));
    for (Index i = 0; i < qp.n_ineq(); ++i) append(qp.G.row(i));
    for (Index j = 0; j < qp.n_range(); ++j) append(qp.R.row(j));
  }

  const QpProblem<Scalar>& qp;
  std::vector<std::vector<std::pair<Index, Scalar>>> compact;
  std::vector<Scalar> norms;

  void append(const Eigen::Ref<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>& row) {
    std::vector<std::pair<Index, Scalar>> entries;
    Scalar sq = 0;
    for (Index col = 0; col < row.size(); ++col) {
      if (row[col] != Scalar(0)) {
        entries.emplace_back(col, row[col]);
        sq += row[col] * row[col];
      }
    }
    norms[compact.size()] = std::sqrt(sq);
    compact.push_back(std::move(entries));
  }

  Index flat_index(const ConstraintRef& ref) const {
    return ref.side == ConstraintSide::Ineq ? ref.row : qp.n_ineq() + ref.row;
  }

  Scalar row_norm(const ConstraintRef& ref) const {
    return norms[static_cast<size_t>(flat_index(ref))];
  }

  template <typename Derived>
  Scalar dot(const ConstraintRef& ref, const Eigen::MatrixBase<Derived>& v) const {
    Scalar sum = 0;
    for (const auto& [col, value] : compact[static_cast<size_t>(flat_index(ref))])
      sum += value * v[col];
    return sum;
  }

  VectorX<Scalar> row(const ConstraintRef& ref) const {
    VectorX<Scalar> dense = VectorX<Scalar>::Zero(qp.n());
    for (const auto& [col, value] : compact[static_cast<size_t>(flat_index(ref))])
      dense[col] = value;
    return dense;
  }

  Scalar rhs(const ConstraintRef& ref) const {
    switch (ref.side) {
      case ConstraintSide::Ineq:
        return qp.h[ref.row];
      case ConstraintSide::Lower:
        return qp.lo[ref.row];
      default:
        return qp.hi[ref.row];
    }
  }

  /// rhs - a^T z for Ineq/Upper, a^T z - rhs for Lower: slack >= 0 when feasible.
  Scalar slack(const ConstraintRef& ref, const VectorX<Scalar>& z) const {
    const Scalar az = dot(ref, z);
    return ref.side == ConstraintSide::Lower ? az - rhs(ref) : rhs(ref) - az;
  }
};

/// Cholesky-backed solves with a cheap path for diagonal H.
template <typename Scalar>
struct HessianSolver {
  explicit HessianSolver(const MatrixX<Scalar>& H) {
    diagonal = true;
    for (Index i = 0; i < H.rows() && diagonal; ++i)
      for (Index j = 0; j < H.cols(); ++j)
        if (i != j && H(i, j) != Scalar(0)) {
          diagonal = false;
          break;
        }
    if (diagonal) {
      if ((H.diagonal().array() <= Scalar(0)).any())
        throw NotPositiveDefiniteError("QP Hessian failed Cholesky factorization");
      inv_diag = H.diagonal().cwiseInverse();
    } else {
      llt.compute(H);
      if (llt.info() != Eigen::Success)
        throw NotPositiveDefiniteError("QP Hessian failed Cholesky factorization");
    }
  }

  bool diagonal = false;
  VectorX<Scalar> inv_diag;
  Eigen::LLT<MatrixX<Scalar>> llt;

  VectorX<Scalar> solve(const VectorX<Scalar>& b) const {
    if (diagonal) return inv_diag.cwiseProduct(b);
    return llt.solve(b);
  }

  /// H^{-1} a for a compact row.
  VectorX<Scalar> solve_row(const QpRows<Scalar>& rows, const ConstraintRef& ref) const {
    if (diagonal) {
      VectorX<Scalar> y = VectorX<Scalar>::Zero(inv_diag.size());
      for (const auto& [col, value] :
           rows.compact[static_cast<size_t>(rows.flat_index(ref))])
        y[col] = value * inv_diag[col];
      return y;
    }
    return llt.solve(rows.row(ref));
  }
};

template <typename Scalar>
Scalar max_violation(const QpProblem<Scalar>& qp, const VectorX<Scalar>& z) {
  Scalar worst = 0;
  if (qp.n_ineq() > 0) {
    const VectorX<Scalar> gz = qp.G * z - qp.h;
    worst = std::max(worst, gz.maxCoeff());
  }
  for (Index j = 0; j < qp.n_range(); ++j) {
    const Scalar rz = qp.R.row(j).dot(z);
    if (std::isfinite(qp.lo[j])) worst = std::max(worst, qp.lo[j] - rz);
    if (std::isfinite(qp.hi[j])) worst = std::max(worst, rz - qp.hi[j]);
  }
  return worst;
}

/// Gauss-Newton descent on the summed squared constraint violations.
/// Drives the worst violation below `tight` (essentially to the rounding
/// floor); a point within `loose` is still accepted if the tight target
/// stalls. Throws InfeasibleError otherwise.
template <typename Scalar>
VectorX<Scalar> phase1_point(const QpProblem<Scalar>& qp, VectorX<Scalar> z, Scalar tight,
                             Scalar loose) {
  const Index n = qp.n();
  std::vector<ConstraintRef> sides;
  for (Index i = 0; i < qp.n_ineq(); ++i) sides.push_back({ConstraintSide::Ineq, i});
  for (Index j = 0; j < qp.n_range(); ++j) {
    if (std::isfinite(qp.lo[j])) sides.push_back({ConstraintSide::Lower, j});
    if (std::isfinite(qp.hi[j])) sides.push_back({ConstraintSide::Upper, j});
  }
  const QpRows<Scalar> rows(qp);

  auto merit = [&](const VectorX<Scalar>& p) {
    Scalar phi = 0;
    for (const auto& s : sides) {
      const Scalar viol = std::max(Scalar(0), -rows.slack(s, p));
      phi += viol * viol;
    }
    return Scalar(0.5) * phi;
  };

  for (int pass = 0; pass < 200; ++pass) {
    if (max_violation(qp, z) <= tight) return z;

    MatrixX<Scalar> JtJ = MatrixX<Scalar>::Zero(n, n);
    VectorX<Scalar> Jtr = VectorX<Scalar>::Zero(n);
    Scalar scale = 0;
    for (const auto& s : sides) {
      const Scalar viol = -rows.slack(s, z);
      if (viol <= 0) continue;
      VectorX<Scalar> a = rows.row(s);
      if (s.side == ConstraintSide::Lower) a = -a;  // violated side as a^T z - rhs > 0
      JtJ.noalias() += a * a.transpose();
      Jtr.noalias() += viol * a;
      scale = std::max(scale, a.squaredNorm());
    }
    JtJ.diagonal().array() += Scalar(1e-12) * std::max(Scalar(1), scale);

    const VectorX<Scalar> step = JtJ.ldlt().solve(-Jtr);
    const Scalar slope = Jtr.dot(step);  // directional derivative of the merit
    const Scalar phi0 = merit(z);
    Scalar t = 1;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      if (merit(z + t * step) <= phi0 + Scalar(1e-4) * t * slope) {
        z += t * step;
        accepted = true;
        break;
      }
      t *= Scalar(0.5);
    }
    if (!accepted) break;
  }
  if (max_violation(qp, z) <= loose) return z;
  throw InfeasibleError("phase-1 could not reach the constraint set");
}

}  // namespace detail

/// Primal active-set solve. The working set stays linearly independent by
/// construction (a blocking row is never in the span of the current one),
/// so the Schur complement of H in the KKT system remains factorizable;
/// rank-deficient corner cases fall back to a least-squares multiplier.
template <typename Scalar>
QpSolution<Scalar> solve_qp(const QpProblem<Scalar>& qp, const QpOptions<Scalar>& opts = {}) {
  qp.validate();
  const Index n = qp.n();
  const detail::QpRows<Scalar> rows(qp);
  const detail::HessianSolver<Scalar> hsolve(qp.H);

  const Scalar rhs_scale = [&] {
    Scalar m = 1;
    if (qp.h.size() > 0) m = std::max(m, qp.h.template lpNorm<Eigen::Infinity>());
    for (Index j = 0; j < qp.n_range(); ++j) {
      if (std::isfinite(qp.lo[j])) m = std::max(m, std::abs(qp.lo[j]));
      if (std::isfinite(qp.hi[j])) m = std::max(m, std::abs(qp.hi[j]));
    }
    return m;
  }();
  const Scalar feas_tol = std::max(opts.kkt_tol, Scalar(1e-10)) * rhs_scale;
  const Scalar dual_tol =
      Scalar(1e-10) * (Scalar(1) + qp.g.template lpNorm<Eigen::Infinity>());

  VectorX<Scalar> z;
  if (opts.start && detail::max_violation(qp, *opts.start) <= feas_tol) {
    z = *opts.start;
  } else {
    VectorX<Scalar> seed = opts.start ? *opts.start : VectorX<Scalar>(hsolve.solve(-qp.g));
    z = detail::phase1_point(qp, std::move(seed), Scalar(1e-13) * rhs_scale, feas_tol);
  }

  const VectorX<Scalar> z_free = hsolve.solve(-qp.g);

  // Working set bookkeeping: rows of A_W, cached Y = H^{-1} A_W^T and the
  // Schur complement S = A_W H^{-1} A_W^T, grown/shrunk incrementally.
  std::vector<ConstraintRef> working;
  MatrixX<Scalar> Y(n, 0);
  MatrixX<Scalar> S(0, 0);
  std::vector<char> in_ineq(static_cast<size_t>(qp.n_ineq()), 0);
  std::vector<char> at_lower(static_cast<size_t>(qp.n_range()), 0);
  std::vector<char> at_upper(static_cast<size_t>(qp.n_range()), 0);

  auto member_flag = [&](const ConstraintRef& ref) -> char& {
    switch (ref.side) {
      case ConstraintSide::Ineq:
        return in_ineq[static_cast<size_t>(ref.row)];
      case ConstraintSide::Lower:
        return at_lower[static_cast<size_t>(ref.row)];
      default:
        return at_upper[static_cast<size_t>(ref.row)];
    }
  };

  // Rows whose addition would make the working set numerically dependent
  // are quarantined (ignored as blockers) until the working set changes.
  std::vector<char> quarantined(
      static_cast<size_t>(qp.n_ineq() + 2 * qp.n_range()), 0);

  auto push_row = [&](const ConstraintRef& ref) {
    const VectorX<Scalar> y = hsolve.solve_row(rows, ref);
    const Index k = static_cast<Index>(working.size());
    Y.conservativeResize(Eigen::NoChange, k + 1);
    Y.col(k) = y;
    S.conservativeResize(k + 1, k + 1);
    for (Index i = 0; i < k; ++i) {
      const Scalar sij = rows.dot(working[static_cast<size_t>(i)], y);
      S(i, k) = sij;
      S(k, i) = sij;
    }
    S(k, k) = rows.dot(ref, y);
    working.push_back(ref);
    member_flag(ref) = 1;
  };

  // undo the latest push
  auto pop_row = [&] {
    const Index k = static_cast<Index>(working.size()) - 1;
    member_flag(working[static_cast<size_t>(k)]) = 0;
    working.pop_back();
    Y.conservativeResize(Eigen::NoChange, k);
    S.conservativeResize(k, k);
  };

  auto schur_healthy = [&] {
    const auto ldlt = S.ldlt();
    if (ldlt.info() != Eigen::Success) return false;
    const VectorX<Scalar> d = ldlt.vectorD().cwiseAbs();
    return d.minCoeff() > Scalar(1e-11) * std::max(Scalar(1e-300), d.maxCoeff());
  };

  // Returns false (and quarantines the row) when the add would break the
  // factorization; the caller must then ignore this row as a blocker.
  auto try_add_row = [&](const ConstraintRef& ref) {
    if (static_cast<Index>(working.size()) >= n) {
      quarantined[static_cast<size_t>(constraint_id(ref, qp.n_ineq()))] = 1;
      return false;
    }
    push_row(ref);
    if (!schur_healthy()) {
      pop_row();
      quarantined[static_cast<size_t>(constraint_id(ref, qp.n_ineq()))] = 1;
      return false;
    }
    std::fill(quarantined.begin(), quarantined.end(), 0);
    return true;
  };

  auto drop_row = [&](Index k) {
    std::fill(quarantined.begin(), quarantined.end(), 0);
    member_flag(working[static_cast<size_t>(k)]) = 0;
    working.erase(working.begin() + k);
    const Index m = Y.cols();
    for (Index c = k; c + 1 < m; ++c) Y.col(c) = Y.col(c + 1);
    Y.conservativeResize(Eigen::NoChange, m - 1);
    MatrixX<Scalar> Snew(m - 1, m - 1);
    for (Index i = 0, ii = 0; i < m; ++i) {
      if (i == k) continue;
      for (Index j = 0, jj = 0; j < m; ++j) {
        if (j == k) continue;
        Snew(ii, jj) = S(i, j);
        ++jj;
      }
      ++ii;
    }
    S = std::move(Snew);
  };

  // Warm start: re-admit hinted rows that are still active at z and keep
  // the Schur complement invertible. All rows are admitted in one shot;
  // only if that breaks the factorization do we fall back to one-by-one.
  if (opts.warm_start) {
    auto hinted = opts.warm_start->refs();
    std::sort(hinted.begin(), hinted.end(), [&](const auto& a, const auto& b) {
      return constraint_id(a, qp.n_ineq()) < constraint_id(b, qp.n_ineq());
    });
    std::vector<ConstraintRef> eligible;
    for (const auto& ref : hinted) {
      if (ref.row < 0) continue;
      if (ref.side == ConstraintSide::Ineq && ref.row >= qp.n_ineq()) continue;
      if (ref.side != ConstraintSide::Ineq && ref.row >= qp.n_range()) continue;
      if (ref.side == ConstraintSide::Lower && !std::isfinite(qp.lo[ref.row])) continue;
      if (ref.side == ConstraintSide::Upper && !std::isfinite(qp.hi[ref.row])) continue;
      if (member_flag(ref)) continue;
      if (static_cast<Index>(eligible.size()) >= n) break;
      if (std::abs(rows.slack(ref, z)) > feas_tol) continue;
      eligible.push_back(ref);
      member_flag(ref) = 1;
    }
    for (const auto& ref : eligible) member_flag(ref) = 0;
    if (!eligible.empty()) {
      const Index m = static_cast<Index>(eligible.size());
      Y.resize(n, m);
      for (Index k = 0; k < m; ++k)
        Y.col(k) = hsolve.solve_row(rows, eligible[static_cast<size_t>(k)]);
      S.resize(m, m);
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j <= i; ++j) {
          S(i, j) = rows.dot(eligible[static_cast<size_t>(i)], Y.col(j));
          S(j, i) = S(i, j);
        }
      working = eligible;
      for (const auto& ref : working) member_flag(ref) = 1;
      if (!schur_healthy()) {
        for (const auto& ref : working) member_flag(ref) = 0;
        working.clear();
        Y.resize(n, 0);
        S.resize(0, 0);
        for (const auto& ref : eligible) try_add_row(ref);
      }
    }
    std::fill(quarantined.begin(), quarantined.end(), 0);
  }

  const int max_iterations =
      opts.max_iterations > 0
          ? opts.max_iterations
          : static_cast<int>(60 + 4 * (n + qp.n_ineq() + 2 * qp.n_range()));

  auto solve_multipliers = [&](VectorX<Scalar>& nu) {
    const Index m = static_cast<Index>(working.size());
    VectorX<Scalar> resid(m);
    for (Index i = 0; i < m; ++i)
      resid[i] = rows.dot(working[static_cast<size_t>(i)], z_free) -
                 rows.rhs(working[static_cast<size_t>(i)]);
    nu = S.ldlt().solve(resid);
    if (!nu.allFinite() || (S * nu - resid).template lpNorm<Eigen::Infinity>() >
                               Scalar(1e-8) * (Scalar(1) + resid.template lpNorm<Eigen::Infinity>())) {
      // rank-deficient working set: least-squares (minimum-norm) multiplier
      nu = S.completeOrthogonalDecomposition().solve(resid);
    }
  };

  auto assemble = [&](int iterations) {
    QpSolution<Scalar> sol;
    sol.z = z;
    sol.mu = VectorX<Scalar>::Zero(qp.n_ineq());
    sol.alpha = VectorX<Scalar>::Zero(qp.n_range());
    sol.gamma = VectorX<Scalar>::Zero(qp.n_range());
    if (!working.empty()) {
      VectorX<Scalar> nu;
      solve_multipliers(nu);
      for (Index k = 0; k < static_cast<Index>(working.size()); ++k) {
        const auto& ref = working[static_cast<size_t>(k)];
        switch (ref.side) {
          case ConstraintSide::Ineq:
            sol.mu[ref.row] = nu[k];
            break;
          case ConstraintSide::Lower:
            sol.alpha[ref.row] = -nu[k];
            break;
          default:
            sol.gamma[ref.row] = nu[k];
        }
      }
    }
    const Scalar act_tol = feas_tol * Scalar(10);
    for (Index i = 0; i < qp.n_ineq(); ++i)
      if (qp.h[i] - rows.dot({ConstraintSide::Ineq, i}, z) <= act_tol)
        sol.active.ineq.push_back(i);
    for (Index j = 0; j < qp.n_range(); ++j) {
      const Scalar rz = rows.dot({ConstraintSide::Lower, j}, z);
      if (std::isfinite(qp.lo[j]) && rz - qp.lo[j] <= act_tol) sol.active.lower.push_back(j);
      if (std::isfinite(qp.hi[j]) && qp.hi[j] - rz <= act_tol) sol.active.upper.push_back(j);
    }
    for (const auto& ref : working) {
      switch (ref.side) {
        case ConstraintSide::Ineq:
          sol.working_set.ineq.push_back(ref.row);
          break;
        case ConstraintSide::Lower:
          sol.working_set.lower.push_back(ref.row);
          break;
        default:
          sol.working_set.upper.push_back(ref.row);
      }
    }
    sol.iterations = iterations;
    return sol;
  };

  // Degenerate vertices can cycle under the most-negative-dual drop rule;
  // after a run of zero-length steps we fall back to Bland's least-index
  // rule, which terminates.
  int stalled_steps = 0;
  const int bland_threshold = 25;

  for (int iter = 0; iter < max_iterations; ++iter) {
    // Minimizer subject to the working rows held as equalities.
    VectorX<Scalar> nu;
    VectorX<Scalar> z_target;
    if (working.empty()) {
      z_target = z_free;
    } else {
      solve_multipliers(nu);
      z_target = z_free - Y * nu;
    }

    const VectorX<Scalar> p = z_target - z;
    const Scalar pnorm = p.template lpNorm<Eigen::Infinity>();


    if (pnorm <= Scalar(1e-12) * (Scalar(1) + z.template lpNorm<Eigen::Infinity>())) {
      // Stationary on the working set: check dual signs.
      const bool bland = stalled_steps > bland_threshold;
      Index drop = -1;
      Index drop_id = -1;
      Scalar worst = -dual_tol;
      for (Index k = 0; k < static_cast<Index>(working.size()); ++k) {
        const auto& ref = working[static_cast<size_t>(k)];
        const Scalar eff = ref.side == ConstraintSide::Lower ? -nu[k] : nu[k];
        if (eff >= -dual_tol) continue;
        const Index id = constraint_id(ref, qp.n_ineq());
        const bool better = bland ? (drop < 0 || id < drop_id)
                                  : (eff < worst || (eff == worst && drop >= 0 && id < drop_id));
        if (better) {
          worst = eff;
          drop = k;
          drop_id = id;
        }
      }
      if (drop < 0) return assemble(iter);
      drop_row(drop);
      ++stalled_steps;
      continue;
    }

    // Ratio test toward z_target over the non-working, non-quarantined
    // sides; the blocking row is the smallest ordering id among the ties.
    const Scalar pn = p.norm();
    Scalar t_min = 1;
    ConstraintRef blocker{ConstraintSide::Ineq, -1};
    Index blocker_id = -1;
    auto consider = [&](const ConstraintRef& ref, Scalar ap, Scalar slack) {
      const Index id = constraint_id(ref, qp.n_ineq());
      if (quarantined[static_cast<size_t>(id)]) return;
      const Scalar ti = std::max(Scalar(0), slack / ap);
      const Scalar tie = t_min + Scalar(1e-12) * (Scalar(1) + t_min);
      if (ti > tie) return;
      if (ti < t_min - Scalar(1e-12) * (Scalar(1) + t_min)) {
        t_min = ti;
        blocker = ref;
        blocker_id = id;
        return;
      }
      t_min = std::min(t_min, ti);
      if (blocker_id < 0 || id < blocker_id) {
        blocker_id = id;
        blocker = ref;
      }
    };
    for (Index i = 0; i < qp.n_ineq(); ++i) {
      const ConstraintRef ref{ConstraintSide::Ineq, i};
      if (in_ineq[static_cast<size_t>(i)]) continue;
      const Scalar ap = rows.dot(ref, p);
      if (ap <= Scalar(1e-13) * std::max(Scalar(1), rows.row_norm(ref) * pn)) continue;
      consider(ref, ap, qp.h[i] - rows.dot(ref, z));
    }
    for (Index j = 0; j < qp.n_range(); ++j) {
      const ConstraintRef lower{ConstraintSide::Lower, j};
      const Scalar ap = rows.dot(lower, p);
      const Scalar thresh = Scalar(1e-13) * std::max(Scalar(1), rows.row_norm(lower) * pn);
      const Scalar rz = rows.dot(lower, z);
      if (!at_lower[static_cast<size_t>(j)] && std::isfinite(qp.lo[j]) && ap < -thresh)
        consider(lower, ap, qp.lo[j] - rz);
      if (!at_upper[static_cast<size_t>(j)] && std::isfinite(qp.hi[j]) && ap > thresh)
        consider({ConstraintSide::Upper, j}, ap, qp.hi[j] - rz);
    }

    if (t_min >= 1 || blocker_id < 0) {
      z = z_target;
      stalled_steps = 0;
      continue;
    }
    if (t_min > Scalar(1e-12))
      stalled_steps = 0;
    else
      ++stalled_steps;

    z += t_min * p;
    try_add_row(blocker);
  }

  throw CycleLimitError<Scalar>("active-set iteration cap hit", assemble(max_iterations));
}

/// Stationarity residual ||H z + g + G^T mu + R^T (gamma - alpha)||_inf.
template <typename Scalar>
Scalar qp_stationarity_residual(const QpProblem<Scalar>& qp, const QpSolution<Scalar>& sol) {
  VectorX<Scalar> grad = qp.H * sol.z + qp.g;
  if (qp.n_ineq() > 0) grad.noalias() += qp.G.transpose() * sol.mu;
  if (qp.n_range() > 0) grad.noalias() += qp.R.transpose() * (sol.gamma - sol.alpha);
  return grad.template lpNorm<Eigen::Infinity>();
}

}  // namespace splitsqp
