#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "splitsqp/alf.hpp"
#include "splitsqp/bench.hpp"
#include "splitsqp/problem.hpp"
#include "splitsqp/qp.hpp"
#include "splitsqp/qp_oracle.hpp"
#include "splitsqp/solver.hpp"

namespace splitsqp {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline CheckResult make_check(std::string name, bool pass, const std::string& detail = "") {
  return {std::move(name), pass, detail};
}

/// Random strictly convex QP with a feasible point baked in by construction.
template <typename Scalar, typename Rng>
QpProblem<Scalar> random_feasible_qp(Rng& rng, Index max_n = 4, Index max_ineq = 3,
                                     Index max_range = 2) {
  std::uniform_int_distribution<Index> pick_n(1, max_n);
  std::uniform_int_distribution<Index> pick_p(0, max_ineq);
  std::uniform_int_distribution<Index> pick_q(0, max_range);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> slack(0.0, 1.5);

  const Index n = pick_n(rng);
  const Index p = pick_p(rng);
  const Index q = pick_q(rng);

  QpProblem<Scalar> qp;
  MatrixX<Scalar> L(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) L(i, j) = Scalar(unit(rng));
  qp.H = L * L.transpose();
  qp.H.diagonal().array() += Scalar(0.1);
  qp.g.resize(n);
  for (Index i = 0; i < n; ++i) qp.g[i] = Scalar(3 * unit(rng));

  VectorX<Scalar> interior(n);
  for (Index i = 0; i < n; ++i) interior[i] = Scalar(unit(rng));

  qp.G.resize(p, n);
  qp.h.resize(p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < n; ++j) qp.G(i, j) = Scalar(unit(rng));
    qp.h[i] = qp.G.row(i).dot(interior) + Scalar(slack(rng));
  }
  qp.R.resize(q, n);
  qp.lo.resize(q);
  qp.hi.resize(q);
  for (Index i = 0; i < q; ++i) {
    for (Index j = 0; j < n; ++j) qp.R(i, j) = Scalar(unit(rng));
    const Scalar mid = qp.R.row(i).dot(interior);
    // occasionally leave one side open
    const double side = slack(rng);
    qp.lo[i] = side < 0.25 ? -kInf<Scalar> : mid - Scalar(slack(rng)) - Scalar(0.01);
    qp.hi[i] = side > 1.25 ? kInf<Scalar> : mid + Scalar(slack(rng)) + Scalar(0.01);
  }
  return qp;
}

struct QpFuzzStats {
  int instances = 0;
  double max_primal_diff = 0;
  double max_dual_diff = 0;
  int infeasible_misclassifications = 0;
  int disagreements = 0;
};

/// Active-set engine against the enumeration oracle on random instances.
template <typename Scalar>
QpFuzzStats qp_fuzz_against_oracle(int count, unsigned long seed, Scalar primal_tol,
                                   Scalar dual_tol) {
  std::mt19937_64 rng(seed);
  QpFuzzStats stats;
  for (int i = 0; i < count; ++i) {
    const QpProblem<Scalar> qp = random_feasible_qp<Scalar>(rng);
    stats.instances += 1;
    try {
      const QpSolution<Scalar> fast = solve_qp(qp);
      const QpSolution<Scalar> slow = oracle_solve_qp(qp);
      const double zdiff = (fast.z - slow.z).template lpNorm<Eigen::Infinity>();
      double ddiff = 0;
      if (qp.n_ineq() > 0)
        ddiff = std::max(ddiff,
                         double((fast.mu - slow.mu).template lpNorm<Eigen::Infinity>()));
      if (qp.n_range() > 0) {
        ddiff = std::max(
            ddiff, double((fast.alpha - slow.alpha).template lpNorm<Eigen::Infinity>()));
        ddiff = std::max(
            ddiff, double((fast.gamma - slow.gamma).template lpNorm<Eigen::Infinity>()));
      }
      stats.max_primal_diff = std::max(stats.max_primal_diff, zdiff);
      stats.max_dual_diff = std::max(stats.max_dual_diff, ddiff);
      if (zdiff > double(primal_tol) || ddiff > double(dual_tol)) ++stats.disagreements;
    } catch (const InfeasibleError&) {
      // every generated instance has a feasible interior point
      ++stats.infeasible_misclassifications;
    }
  }
  return stats;
}

namespace detail {

template <typename Scalar>
Scalar rel_error_inf(const VectorX<Scalar>& approx, const VectorX<Scalar>& exact) {
  return (approx - exact).template lpNorm<Eigen::Infinity>() /
         (Scalar(1) + exact.template lpNorm<Eigen::Infinity>());
}

template <typename Scalar>
Scalar rel_error_inf(const MatrixX<Scalar>& approx, const MatrixX<Scalar>& exact) {
  return (approx - exact).template lpNorm<Eigen::Infinity>() /
         (Scalar(1) + exact.template lpNorm<Eigen::Infinity>());
}

/// Per-variable sampling boxes from the single-entry range rows.
template <typename Scalar>
void sampling_box(const TwoBlockProblem<Scalar>& p, VectorX<Scalar>& lo, VectorX<Scalar>& hi) {
  const Index n = p.n1 + p.n2;
  lo = VectorX<Scalar>::Constant(n, -kInf<Scalar>);
  hi = VectorX<Scalar>::Constant(n, kInf<Scalar>);
  VectorX<Scalar> lo_x = lo.head(p.n1), hi_x = hi.head(p.n1);
  tighten_box(p.C, p.l, p.v, lo_x, hi_x);
  lo.head(p.n1) = lo_x;
  hi.head(p.n1) = hi_x;
  VectorX<Scalar> lo_y = lo.tail(p.n2), hi_y = hi.tail(p.n2);
  tighten_box(p.D, p.s, p.r, lo_y, hi_y);
  lo.tail(p.n2) = lo_y;
  hi.tail(p.n2) = hi_y;
  for (Index j = 0; j < n; ++j) {
    if (!std::isfinite(lo[j])) lo[j] = -1;
    if (!std::isfinite(hi[j])) hi[j] = 1;
  }
}

template <typename Scalar, typename Rng>
Point<Scalar> sample_point(const TwoBlockProblem<Scalar>& p, const VectorX<Scalar>& lo,
                           const VectorX<Scalar>& hi, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  VectorX<Scalar> u(p.n1 + p.n2);
  for (Index j = 0; j < u.size(); ++j)
    u[j] = lo[j] + Scalar(unit(rng)) * (hi[j] - lo[j]);
  return {u.head(p.n1), u.tail(p.n2)};
}

template <typename Scalar, typename F>
VectorX<Scalar> central_gradient(const F& value, const VectorX<Scalar>& at) {
  VectorX<Scalar> g(at.size());
  for (Index i = 0; i < at.size(); ++i) {
    const Scalar step = Scalar(1e-6) * std::max(Scalar(1), std::abs(at[i]));
    VectorX<Scalar> hi = at, lo = at;
    hi[i] += step;
    lo[i] -= step;
    g[i] = (value(hi) - value(lo)) / (2 * step);
  }
  return g;
}

template <typename Scalar, typename G>
MatrixX<Scalar> central_jacobian(const G& grad, const VectorX<Scalar>& at) {
  MatrixX<Scalar> J(at.size(), at.size());
  for (Index i = 0; i < at.size(); ++i) {
    const Scalar step = Scalar(1e-6) * std::max(Scalar(1), std::abs(at[i]));
    VectorX<Scalar> hi = at, lo = at;
    hi[i] += step;
    lo[i] -= step;
    J.col(i) = (grad(hi) - grad(lo)) / (2 * step);
  }
  return J;
}

}  // namespace detail

/// Gradient and Hessian callbacks against central differences at random
/// points inside the variable boxes; also differentiates the merit value
/// against its assembled gradient.
template <typename Scalar>
std::vector<CheckResult> derivative_checks(const TwoBlockProblem<Scalar>& p, Scalar beta,
                                           int points, unsigned long seed,
                                           Scalar grad_tol = Scalar(1e-6),
                                           Scalar hess_tol = Scalar(1e-4)) {
  std::mt19937_64 rng(seed);
  VectorX<Scalar> lo, hi;
  detail::sampling_box(p, lo, hi);

  Scalar worst_grad = 0, worst_hess = 0, worst_alf = 0, worst_sym = 0;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k < points; ++k) {
    const Point<Scalar> u = detail::sample_point(p, lo, hi, rng);

    worst_grad = std::max(worst_grad,
                          detail::rel_error_inf(detail::central_gradient<Scalar>(p.f_eval, u.x),
                                                VectorX<Scalar>(p.f_grad(u.x))));
    worst_grad = std::max(
        worst_grad, detail::rel_error_inf(detail::central_gradient<Scalar>(p.theta_eval, u.y),
                                          VectorX<Scalar>(p.theta_grad(u.y))));
    const MatrixX<Scalar> Hx = p.f_hess(u.x);
    const MatrixX<Scalar> Hy = p.theta_hess(u.y);
    worst_hess = std::max(worst_hess,
                          detail::rel_error_inf(detail::central_jacobian<Scalar>(p.f_grad, u.x),
                                                Hx));
    worst_hess = std::max(
        worst_hess,
        detail::rel_error_inf(detail::central_jacobian<Scalar>(p.theta_grad, u.y), Hy));
    worst_sym = std::max(
        worst_sym, (Hx - Hx.transpose()).template lpNorm<Eigen::Infinity>() /
                       (Scalar(1) + Hx.template lpNorm<Eigen::Infinity>()));
    worst_sym = std::max(
        worst_sym, (Hy - Hy.transpose()).template lpNorm<Eigen::Infinity>() /
                       (Scalar(1) + Hy.template lpNorm<Eigen::Infinity>()));

    AlfContext<Scalar> ctx{&p, beta, VectorX<Scalar>(p.m1())};
    for (Index i = 0; i < ctx.lambda.size(); ++i) ctx.lambda[i] = Scalar(unit(rng));
    auto alf_of = [&](const VectorX<Scalar>& stacked) {
      return alf_value(ctx, VectorX<Scalar>(stacked.head(p.n1)),
                       VectorX<Scalar>(stacked.tail(p.n2)));
    };
    const VectorX<Scalar> stacked = u.stacked();
    worst_alf = std::max(worst_alf,
                         detail::rel_error_inf(detail::central_gradient<Scalar>(alf_of, stacked),
                                               alf_gradient(ctx, u.x, u.y)));
  }

  auto fmt = [](Scalar v) {
    std::ostringstream os;
    os << "worst rel err " << v;
    return os.str();
  };
  return {
      make_check("objective gradients vs central differences", worst_grad <= grad_tol,
                 fmt(worst_grad)),
      make_check("objective Hessians vs gradient differences", worst_hess <= hess_tol,
                 fmt(worst_hess)),
      make_check("Hessian symmetry", worst_sym <= Scalar(1e-12), fmt(worst_sym)),
      make_check("merit gradient vs central differences", worst_alf <= grad_tol,
                 fmt(worst_alf)),
  };
}

/// The per-iteration invariants of a finished run: merit descent with the
/// multiplier and line-search terms, partial feasibility of every iterate,
/// the directional-derivative bound, full-step feasibility, and the
/// worst-case iteration bound.
template <typename Scalar>
std::vector<CheckResult> invariant_checks(const SolveReport<Scalar>& report,
                                          const SolverParams<Scalar>& params) {
  const Scalar feas_cap = Scalar(1e-8);
  bool monotone = true, feasible = true, descent = true, full_step = true;
  Scalar worst_monotone = -kInf<Scalar>, worst_feas = 0, worst_descent = -kInf<Scalar>,
         worst_full = 0;
  for (const auto& rec : report.trace) {
    const Scalar slack = Scalar(1e-8) + Scalar(32) * std::numeric_limits<Scalar>::epsilon() *
                                            std::abs(rec.alf_before);
    const Scalar drop = rec.alf_before - params.xi * rec.eq_res_next * rec.eq_res_next -
                        rec.t * params.rho * rec.metric_sq;
    worst_monotone = std::max(worst_monotone, rec.alf_after - drop);
    if (rec.alf_after > drop + slack) monotone = false;

    worst_feas = std::max({worst_feas, rec.ineq_violation_next, rec.range_violation_next});
    if (rec.ineq_violation_next > feas_cap || rec.range_violation_next > feas_cap)
      feasible = false;

    const Scalar margin = Scalar(1e-8) * (Scalar(1) + rec.dir_norm * rec.dir_norm);
    worst_descent = std::max(worst_descent, rec.grad_dot_dir + rec.metric_sq);
    if (rec.grad_dot_dir > -rec.metric_sq + margin) descent = false;

    worst_full = std::max(worst_full, rec.full_step_violation);
    if (rec.full_step_violation > feas_cap) full_step = false;
  }
  const auto audit = audit_complexity(report, params);

  auto fmt = [](Scalar v) {
    std::ostringstream os;
    os << "worst " << v;
    return os.str();
  };
  return {
      make_check("merit descent per iteration", monotone, fmt(worst_monotone)),
      make_check("partial feasibility of iterates", feasible, fmt(worst_feas)),
      make_check("directional derivative bound", descent, fmt(worst_descent)),
      make_check("full-step feasibility at c_max", full_step, fmt(worst_full)),
      make_check("worst-case iteration bound", audit.bound_satisfied && audit.monotone_ok,
                 audit.bound_satisfied ? "holds along the trace" : "violated"),
  };
}

}  // namespace splitsqp
