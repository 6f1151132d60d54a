#pragma once

#include <chrono>
#include <future>
#include <optional>
#include <vector>

#include "splitsqp/alf.hpp"
#include "splitsqp/problem.hpp"
#include "splitsqp/qp.hpp"
#include "splitsqp/types.hpp"

namespace splitsqp {

enum class TerminationMode { Absolute, Relative };
enum class HessianMode { ExactRegularized, Identity };

enum class TerminationReason {
  KktExact,        // stacked step/residual vector vanished (machine zero)
  AbsoluteTol,     // eps_abs fell below eps
  RelativeTol,     // eps_rel fell below eps
  MaxIter,
  LineSearchFail,
};

inline bool is_converged(TerminationReason reason) {
  return reason == TerminationReason::KktExact || reason == TerminationReason::AbsoluteTol ||
         reason == TerminationReason::RelativeTol;
}

/// All scalar knobs of the outer iteration. Defaults follow the academic
/// benchmark family; the EPD family overrides a handful of them.
template <typename Scalar>
struct SolverParams {
  Scalar rho = Scalar(0.45);    // sufficient-decrease slope, in (0, 1)
  Scalar sigma = Scalar(0.9);   // backtracking ratio, in (0, 1)
  Scalar c = Scalar(1);         // inequality contraction parameter, in [0, 1]
  Scalar beta = Scalar(1);      // equality penalty, > 0
  Scalar xi = Scalar(1);        // multiplier step length, > 0

  // Splitting-validity test: accept the split directions when
  //   min(||mu_x||, ||mu_y||) <= split_mu_cap  and
  //   ||mu_x - mu_y|| <= split_gap_scale *
  //       (||d||^split_exp_dir + split_res_weight * ||eq_res||^split_exp_res).
  Scalar split_exp_dir = Scalar(1.01);
  Scalar split_exp_res = Scalar(1.01);
  Scalar split_mu_cap = Scalar(500);
  Scalar split_gap_scale = Scalar(7000);
  Scalar split_res_weight = Scalar(0);

  Scalar eps = Scalar(1e-8);  // termination accuracy
  TerminationMode termination = TerminationMode::Absolute;
  int max_iter = 2000;
  int max_linesearch = 100;

  HessianMode hessian_mode = HessianMode::ExactRegularized;
  Scalar hess_min_eig = Scalar(1e-4);  // eigenvalue floor for regularization

  bool distributed = true;  // false: always solve the coupled subproblem

  Scalar feas_tol = Scalar(1e-8);        // partial-feasibility tolerance
  Scalar kkt_exact_tol = Scalar(1e-12);  // machine-zero test in the update step
  Scalar qp_kkt_tol = Scalar(1e-9);

  void validate() const {
    auto require = [](bool ok, const char* msg) {
      if (!ok) throw std::invalid_argument(msg);
    };
    require(rho > 0 && rho < 1, "rho must lie in (0,1)");
    require(sigma > 0 && sigma < 1, "sigma must lie in (0,1)");
    require(c >= 0 && c <= 1, "c must lie in [0,1]");
    require(beta > 0, "beta must be positive");
    require(xi > 0, "xi must be positive");
    require(split_exp_dir > 0 && split_exp_res > 0, "splitting exponents must be positive");
    require(split_mu_cap > 0 && split_gap_scale > 0, "splitting caps must be positive");
    require(split_res_weight >= 0, "split_res_weight must be nonnegative");
    require(eps > 0, "eps must be positive");
    require(max_iter > 0 && max_linesearch > 0, "iteration caps must be positive");
    require(hess_min_eig > 0, "hess_min_eig must be positive");
  }
};

/// State carried across one outer iteration; exposed for tests.
template <typename Scalar>
struct SolverState {
  Iterate<Scalar> w;
  HessianBlocks<Scalar> hess;
  VectorX<Scalar> h;  // clamped joint-inequality value
  QpSolution<Scalar> qp_x, qp_y;
  std::optional<QpSolution<Scalar>> qp_coupled;
  VectorX<Scalar> direction;  // d = (dx, dy)
  Scalar step = 0;
  Scalar c_max = 1;
  bool used_splitting = false;
  Scalar alf_value = 0;
};

/// One row of the per-iteration trace.
template <typename Scalar>
struct IterationRecord {
  int k = 0;
  Scalar alf_before = 0;          // merit at w_k
  Scalar alf_after = 0;           // merit at w_{k+1}
  Scalar objective_next = 0;      // f + theta at u_{k+1}
  Scalar dir_norm = 0;            // ||d||_2
  Scalar metric_sq = 0;           // ||d||^2 in the step metric
  Scalar grad_dot_dir = 0;        // ALF-gradient / direction inner product
  Scalar eps_abs = 0;
  Scalar eps_rel = 0;
  Scalar t = 0;
  Scalar c_max = 0;
  bool used_splitting = false;
  Scalar eq_res_next = 0;         // ||A x_{k+1} + B y_{k+1} - b||_2
  Scalar ineq_violation_next = 0;
  Scalar range_violation_next = 0;
  Scalar full_step_violation = 0;  // worst violation at u_k + c_max * d
};

template <typename Scalar>
struct SolveReport {
  Iterate<Scalar> final;
  Scalar objective = 0;
  FeasibilityReport<Scalar> feasibility;
  int n_iter = 0;
  int n_split_iter = 0;
  Scalar splitting_ratio = 0;
  TerminationReason reason = TerminationReason::MaxIter;
  std::vector<IterationRecord<Scalar>> trace;
  double wall_seconds = 0;
  std::optional<Scalar> kkt_residual_at_stop;  // set when the machine-zero stop fires
};

/// Recognition test deciding whether the split directions are kept.
template <typename Scalar>
bool check_splitting_valid(const VectorX<Scalar>& mu_x, const VectorX<Scalar>& mu_y,
                           const VectorX<Scalar>& direction, const VectorX<Scalar>& eq_res,
                           const SolverParams<Scalar>& params) {
  const Scalar nx = mu_x.norm();
  const Scalar ny = mu_y.norm();
  if (std::min(nx, ny) > params.split_mu_cap) return false;
  const Scalar gap = (mu_x - mu_y).norm();
  const Scalar budget =
      params.split_gap_scale *
      (std::pow(direction.norm(), params.split_exp_dir) +
       params.split_res_weight * std::pow(eq_res.norm(), params.split_exp_res));
  return gap <= budget;
}

template <typename Scalar>
struct ArmijoResult {
  Scalar t = 0;
  VectorX<Scalar> x_next, y_next;
  int backtracks = 0;
};

/// Largest t in {c_max * sigma^i} with
///   L(u_k + t d, lambda_k) <= L(w_k) - rho * t * metric_sq,
/// up to machine-precision slack on the right-hand side. Feasibility of the
/// accepted point is inherited from the step bound t <= c_max.
template <typename Scalar>
ArmijoResult<Scalar> armijo_search(const AlfContext<Scalar>& ctx, const VectorX<Scalar>& x,
                                   const VectorX<Scalar>& y, const VectorX<Scalar>& direction,
                                   Scalar metric_sq, Scalar c_max,
                                   const SolverParams<Scalar>& params) {
  const Index n1 = x.size();
  const Index n2 = y.size();
  const Scalar base = alf_value(ctx, x, y);
  const Scalar noise =
      Scalar(32) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(base));

  Scalar t = c_max;
  for (int i = 0; i < params.max_linesearch; ++i, t *= params.sigma) {
    ArmijoResult<Scalar> result;
    result.x_next = x + t * direction.head(n1);
    result.y_next = y + t * direction.tail(n2);
    const Scalar value = alf_value(ctx, result.x_next, result.y_next);
    if (value <= base - params.rho * t * metric_sq + noise) {
      result.t = t;
      result.backtracks = i;
      return result;
    }
  }
  throw LineSearchError("no step in {c_max * sigma^i} produced sufficient decrease");
}

template <typename Scalar>
VectorX<Scalar> update_multiplier(const VectorX<Scalar>& lambda, const VectorX<Scalar>& eq_res_next,
                                  Scalar xi) {
  if (lambda.size() == 0) return lambda;
  return lambda + xi * eq_res_next;
}

/// (eps_abs, eps_rel) of the accuracy criteria:
///   eps_abs = ||(x+ - x, y+ - y, A x+ + B y+ - b)||_2
///   eps_rel = eps_abs / (||(x, y, b)||_2 + 1)
template <typename Scalar>
std::pair<Scalar, Scalar> termination_metrics(const VectorX<Scalar>& x, const VectorX<Scalar>& y,
                                              const VectorX<Scalar>& x_next,
                                              const VectorX<Scalar>& y_next,
                                              const VectorX<Scalar>& eq_res_next,
                                              const VectorX<Scalar>& b) {
  const Scalar eps_abs = std::sqrt((x_next - x).squaredNorm() + (y_next - y).squaredNorm() +
                                   eq_res_next.squaredNorm());
  const Scalar denom = std::sqrt(x.squaredNorm() + y.squaredNorm() + b.squaredNorm()) + Scalar(1);
  return {eps_abs, eps_abs / denom};
}

namespace detail {

template <typename Scalar>
bool is_diagonal(const MatrixX<Scalar>& H) {
  for (Index i = 0; i < H.rows(); ++i)
    for (Index j = 0; j < H.cols(); ++j)
      if (i != j && H(i, j) != Scalar(0)) return false;
  return true;
}

template <typename Scalar>
Scalar min_eigenvalue(const MatrixX<Scalar>& H) {
  if (H.rows() == 0) return Scalar(1);
  if (is_diagonal(H)) return H.diagonal().minCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(H, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw SolveError("eigenvalue computation failed during Hessian regularization");
  return eig.eigenvalues().minCoeff();
}

}  // namespace detail

/// H + psi(H) I with
///   psi = 0            when min_eig(H) >  floor
///   psi = -min_eig + floor  when |min_eig| <= floor
///   psi = -2 min_eig   when min_eig < -floor,
/// so the result has minimum eigenvalue >= min(min_eig(H), floor) > 0.
template <typename Scalar>
MatrixX<Scalar> regularized_hessian(const MatrixX<Scalar>& H, Scalar floor) {
  const Scalar min_eig = detail::min_eigenvalue(H);
  Scalar shift = 0;
  if (min_eig > floor) {
    shift = 0;
  } else if (std::abs(min_eig) <= floor) {
    shift = -min_eig + floor;
  } else {
    shift = -2 * min_eig;
  }
  if (shift == Scalar(0)) return H;
  MatrixX<Scalar> out = H;
  out.diagonal().array() += shift;
  return out;
}

/// Infinity norm over every row of the first-order optimality system:
/// stationarity of both blocks, equality residual, complementarity
/// products, dual negativity, and primal violations.
template <typename Scalar>
Scalar kkt_residual(const TwoBlockProblem<Scalar>& p, const VectorX<Scalar>& x,
                    const VectorX<Scalar>& y, const VectorX<Scalar>& lambda,
                    const VectorX<Scalar>& mu, const VectorX<Scalar>& alpha_x,
                    const VectorX<Scalar>& gamma_x, const VectorX<Scalar>& alpha_y,
                    const VectorX<Scalar>& gamma_y) {
  Scalar worst = 0;

  VectorX<Scalar> stat_x = p.f_grad(x);
  VectorX<Scalar> stat_y = p.theta_grad(y);
  if (p.m1() > 0) {
    stat_x.noalias() -= p.A.transpose() * lambda;
    stat_y.noalias() -= p.B.transpose() * lambda;
  }
  if (p.m2() > 0) {
    stat_x.noalias() += p.E.transpose() * mu;
    stat_y.noalias() += p.F.transpose() * mu;
  }
  if (p.l1() > 0) stat_x.noalias() += p.C.transpose() * (gamma_x - alpha_x);
  if (p.l2() > 0) stat_y.noalias() += p.D.transpose() * (gamma_y - alpha_y);
  worst = std::max(worst, stat_x.template lpNorm<Eigen::Infinity>());
  worst = std::max(worst, stat_y.template lpNorm<Eigen::Infinity>());

  const auto feas = measure_feasibility(p, x, y);
  worst = std::max({worst, feas.eq_residual_inf, feas.ineq_violation, feas.range_violation});

  for (Index i = 0; i < p.m2(); ++i) {
    worst = std::max(worst, std::abs(mu[i] * (-feas.h[i])));
    worst = std::max(worst, -mu[i]);
  }
  const VectorX<Scalar> Cx = p.l1() > 0 ? VectorX<Scalar>(p.C * x) : VectorX<Scalar>(0);
  for (Index i = 0; i < p.l1(); ++i) {
    if (std::isfinite(p.l[i])) worst = std::max(worst, std::abs(alpha_x[i] * (Cx[i] - p.l[i])));
    if (std::isfinite(p.v[i])) worst = std::max(worst, std::abs(gamma_x[i] * (p.v[i] - Cx[i])));
    worst = std::max({worst, -alpha_x[i], -gamma_x[i]});
  }
  const VectorX<Scalar> Dy = p.l2() > 0 ? VectorX<Scalar>(p.D * y) : VectorX<Scalar>(0);
  for (Index j = 0; j < p.l2(); ++j) {
    if (std::isfinite(p.s[j])) worst = std::max(worst, std::abs(alpha_y[j] * (Dy[j] - p.s[j])));
    if (std::isfinite(p.r[j])) worst = std::max(worst, std::abs(gamma_y[j] * (p.r[j] - Dy[j])));
    worst = std::max({worst, -alpha_y[j], -gamma_y[j]});
  }
  return worst;
}

namespace detail {

template <typename Scalar>
MatrixX<Scalar> objective_hessian_block(const TwoBlockProblem<Scalar>& p, bool x_block,
                                        const VectorX<Scalar>& at,
                                        const SolverParams<Scalar>& params) {
  const Index n = x_block ? p.n1 : p.n2;
  if (params.hessian_mode == HessianMode::Identity) return MatrixX<Scalar>::Identity(n, n);
  MatrixX<Scalar> H = x_block ? p.f_hess(at) : p.theta_hess(at);
  if (!H.allFinite())
    throw EvalError(x_block ? "f" : "theta", "Hessian callback returned a non-finite value");
  return regularized_hessian(H, params.hess_min_eig);
}

template <typename Scalar>
VectorX<Scalar> clamped_inequality(const TwoBlockProblem<Scalar>& p, const VectorX<Scalar>& x,
                                   const VectorX<Scalar>& y, Scalar tol) {
  VectorX<Scalar> h = p.inequality_value(x, y);
  for (Index i = 0; i < h.size(); ++i)
    if (h[i] > 0 && h[i] <= tol) h[i] = 0;
  return h;
}

}  // namespace detail

/// Outer iteration. Starts from a partially feasible u0 = (x0, y0) and an
/// equality multiplier lambda0 (zeros when empty), alternating split
/// subproblems with the coupled fallback until a stopping rule fires.
template <typename Scalar>
SolveReport<Scalar> solve(const TwoBlockProblem<Scalar>& problem, const VectorX<Scalar>& x0,
                          const VectorX<Scalar>& y0, const VectorX<Scalar>& lambda0,
                          const SolverParams<Scalar>& params) {
  params.validate();
  problem.validate();
  const auto t_begin = std::chrono::steady_clock::now();

  if (!is_partially_feasible(problem, x0, y0, params.feas_tol))
    throw InfeasibleStartError("initial point violates the inequality or range constraints");
  if (!all_finite(x0) || !all_finite(y0))
    throw InfeasibleStartError("initial point has non-finite entries");

  SolverState<Scalar> state;
  state.w.x = x0;
  state.w.y = y0;
  state.w.lambda =
      lambda0.size() > 0 ? lambda0 : VectorX<Scalar>(VectorX<Scalar>::Zero(problem.m1()));

  SolveReport<Scalar> report;

  const Index n1 = problem.n1;
  const Index n2 = problem.n2;

  for (int k = 0; k < params.max_iter; ++k) {
    const VectorX<Scalar>& x = state.w.x;
    const VectorX<Scalar>& y = state.w.y;
    const VectorX<Scalar>& lambda = state.w.lambda;

    SqpStepData<Scalar> step;
    step.x = x;
    step.y = y;
    step.lambda = lambda;
    step.beta = params.beta;
    step.grad_f = problem.f_grad(x);
    step.grad_theta = problem.theta_grad(y);
    if (!all_finite(step.grad_f)) throw EvalError("f", "gradient of f is non-finite");
    if (!all_finite(step.grad_theta)) throw EvalError("theta", "gradient of theta is non-finite");
    step.eq_residual = problem.equality_residual(x, y);
    step.h = detail::clamped_inequality(problem, x, y, params.feas_tol);
    if (step.h.size() > 0 && step.h.maxCoeff() > 0)
      throw InfeasibleStartError("iterate left the partially feasible set");
    step.hess = make_hessian_blocks(problem,
                                    detail::objective_hessian_block(problem, true, x, params),
                                    detail::objective_hessian_block(problem, false, y, params),
                                    params.beta);
    state.h = step.h;

    AlfContext<Scalar> ctx{&problem, params.beta, lambda};
    state.alf_value = alf_value(ctx, x, y);

    state.direction.resize(n1 + n2);
    state.used_splitting = false;
    Scalar metric_sq = 0;

    if (params.distributed) {
      // The two split subproblems are independent; solve them fork-join.
      // Warm starts reuse the working sets of the previous iteration.
      const QpProblem<Scalar> qp_x = build_split_x_qp(problem, step, params.c);
      const QpProblem<Scalar> qp_y = build_split_y_qp(problem, step, params.c);
      auto task_x = std::async(std::launch::async, [&] {
        QpOptions<Scalar> o;
        o.start = x;
        if (k > 0) o.warm_start = state.qp_x.working_set;
        o.kkt_tol = params.qp_kkt_tol;
        return solve_qp(qp_x, o);
      });
      QpOptions<Scalar> oy;
      oy.start = y;
      if (k > 0) oy.warm_start = state.qp_y.working_set;
      oy.kkt_tol = params.qp_kkt_tol;
      QpSolution<Scalar> sol_y = solve_qp(qp_y, oy);
      state.qp_x = task_x.get();
      state.qp_y = std::move(sol_y);

      state.direction.head(n1) = state.qp_x.z - x;
      state.direction.tail(n2) = state.qp_y.z - y;

      if (check_splitting_valid(state.qp_x.mu, state.qp_y.mu, state.direction,
                                step.eq_residual, params)) {
        state.used_splitting = true;
        // The step cap below 1 exists only to keep the joint inequality rows
        // satisfied; without them convexity of the ranges admits a full step.
        state.c_max = problem.m2() > 0 ? Scalar(1) / (Scalar(2) - params.c) : Scalar(1);
        metric_sq =
            state.direction.head(n1).dot(step.hess.calHx * state.direction.head(n1)) +
            state.direction.tail(n2).dot(step.hess.calHy * state.direction.tail(n2));
      }
    }

    if (!state.used_splitting) {
      const QpProblem<Scalar> qp_c = build_coupled_qp(problem, step);
      QpOptions<Scalar> oc;
      VectorX<Scalar> u(n1 + n2);
      u.head(n1) = x;
      u.tail(n2) = y;
      oc.start = u;
      if (state.qp_coupled) oc.warm_start = state.qp_coupled->working_set;
      oc.kkt_tol = params.qp_kkt_tol;
      state.qp_coupled = solve_qp(qp_c, oc);
      state.direction = state.qp_coupled->z - u;
      state.c_max = 1;
      metric_sq = state.direction.dot(qp_c.H * state.direction);
    }
    state.hess = std::move(step.hess);

    const Scalar grad_dot_dir = alf_gradient(ctx, x, y).dot(state.direction);

    IterationRecord<Scalar> rec;
    rec.k = k;
    rec.alf_before = state.alf_value;
    rec.dir_norm = state.direction.norm();
    rec.metric_sq = metric_sq;
    rec.grad_dot_dir = grad_dot_dir;
    rec.c_max = state.c_max;
    rec.used_splitting = state.used_splitting;
    {
      const VectorX<Scalar> x_full = x + state.c_max * state.direction.head(n1);
      const VectorX<Scalar> y_full = y + state.c_max * state.direction.tail(n2);
      const auto full = measure_feasibility(problem, x_full, y_full);
      rec.full_step_violation = std::max(full.ineq_violation, full.range_violation);
    }

    ArmijoResult<Scalar> ls;
    try {
      ls = armijo_search(ctx, x, y, state.direction, metric_sq, state.c_max, params);
    } catch (const LineSearchError&) {
      report.reason = TerminationReason::LineSearchFail;
      rec.alf_after = state.alf_value;
      rec.objective_next = eval_objective(problem, x, y);
      rec.eq_res_next = step.eq_residual.norm();
      report.trace.push_back(rec);
      break;
    }
    state.step = ls.t;

    const VectorX<Scalar> eq_res_next = problem.equality_residual(ls.x_next, ls.y_next);
    const VectorX<Scalar> lambda_next = update_multiplier(lambda, eq_res_next, params.xi);
    const auto [eps_abs, eps_rel] =
        termination_metrics(x, y, ls.x_next, ls.y_next, eq_res_next, problem.b);

    AlfContext<Scalar> ctx_next{&problem, params.beta, lambda_next};
    rec.t = ls.t;
    rec.eps_abs = eps_abs;
    rec.eps_rel = eps_rel;
    rec.alf_after = alf_value(ctx_next, ls.x_next, ls.y_next);
    rec.objective_next = eval_objective(problem, ls.x_next, ls.y_next);
    rec.eq_res_next = eq_res_next.norm();
    {
      const auto feas_next = measure_feasibility(problem, ls.x_next, ls.y_next);
      rec.ineq_violation_next = feas_next.ineq_violation;
      rec.range_violation_next = feas_next.range_violation;
    }
    if (state.used_splitting) ++report.n_split_iter;
    report.trace.push_back(rec);

    state.w.x = ls.x_next;
    state.w.y = ls.y_next;
    state.w.lambda = lambda_next;

    if (eps_abs <= params.kkt_exact_tol) {
      // Machine-zero stop: the current point together with the subproblem
      // multipliers forms a first-order solution; record its residual.
      VectorX<Scalar> mu, ax, gx, ay, gy;
      if (!state.used_splitting) {
        const auto& coupled = *state.qp_coupled;
        mu = coupled.mu;
        ax = coupled.alpha.head(problem.l1());
        gx = coupled.gamma.head(problem.l1());
        ay = coupled.alpha.tail(problem.l2());
        gy = coupled.gamma.tail(problem.l2());
      } else {
        mu = Scalar(0.5) * (state.qp_x.mu + state.qp_y.mu);
        ax = state.qp_x.alpha;
        gx = state.qp_x.gamma;
        ay = state.qp_y.alpha;
        gy = state.qp_y.gamma;
      }
      report.kkt_residual_at_stop = kkt_residual(problem, state.w.x, state.w.y, state.w.lambda,
                                                 mu, ax, gx, ay, gy);
      report.reason = TerminationReason::KktExact;
      break;
    }
    if (params.termination == TerminationMode::Absolute && eps_abs < params.eps) {
      report.reason = TerminationReason::AbsoluteTol;
      break;
    }
    if (params.termination == TerminationMode::Relative && eps_rel < params.eps) {
      report.reason = TerminationReason::RelativeTol;
      break;
    }
  }

  report.final = state.w;
  report.objective = eval_objective(problem, state.w.x, state.w.y);
  report.feasibility = measure_feasibility(problem, state.w.x, state.w.y);
  report.n_iter = static_cast<int>(report.trace.size());
  report.splitting_ratio =
      report.n_iter > 0 ? Scalar(report.n_split_iter) / Scalar(report.n_iter) : Scalar(0);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return report;
}

template <typename Scalar>
SolveReport<Scalar> solve(const TwoBlockProblem<Scalar>& problem, const Point<Scalar>& u0,
                          const VectorX<Scalar>& lambda0, const SolverParams<Scalar>& params) {
  return solve(problem, u0.x, u0.y, lambda0, params);
}

/// Worst-case iteration audit over a finished trace.
template <typename Scalar>
struct ComplexityAudit {
  Scalar c0 = 0;            // initial merit minus the anchor value
  Scalar n0 = 0;            // min(rho * eta, xi)
  Scalar eta_estimate = 0;  // smallest observed Rayleigh quotient of the step metric
  bool bound_satisfied = true;
  bool monotone_ok = true;  // merit trace nonincreasing within tolerance
};

/// Checks min_{i<=k} eps_i <= sqrt(c0 / n0) / sqrt(k+1) for every k in the
/// trace, anchoring c0 at the best objective observed at an (equality-)
/// feasible iterate, and flags any merit-descent violation.
template <typename Scalar>
ComplexityAudit<Scalar> audit_complexity(const SolveReport<Scalar>& report,
                                         const SolverParams<Scalar>& params) {
  ComplexityAudit<Scalar> audit;
  if (report.trace.empty()) return audit;

  Scalar eta = kInf<Scalar>;
  for (const auto& rec : report.trace) {
    if (rec.dir_norm > Scalar(1e-14))
      eta = std::min(eta, rec.metric_sq / (rec.dir_norm * rec.dir_norm));
    const Scalar tol = Scalar(1e-8) + Scalar(32) * std::numeric_limits<Scalar>::epsilon() *
                                          std::abs(rec.alf_before);
    if (rec.alf_after > rec.alf_before + tol) audit.monotone_ok = false;
  }
  audit.eta_estimate = std::isfinite(eta) ? eta : Scalar(0);
  audit.n0 = std::min(params.rho * audit.eta_estimate, params.xi);

  // Anchor: best objective among iterates whose equality residual is small
  // (partial feasibility holds along the whole trace by construction).
  const Scalar eq_tol = Scalar(1e-6) * (Scalar(1) + (report.trace.back().eq_res_next));
  Scalar anchor = kInf<Scalar>;
  for (const auto& rec : report.trace)
    if (rec.eq_res_next <= std::max(eq_tol, report.trace.back().eq_res_next))
      anchor = std::min(anchor, rec.objective_next);
  // The merit limit can only sit below the last merit value; taking the min
  // keeps the bound valid when the anchor objective exceeds it.
  anchor = std::min(anchor, report.trace.back().alf_after);
  if (!std::isfinite(anchor)) anchor = report.trace.back().alf_after;
  audit.c0 = report.trace.front().alf_before - anchor;

  if (audit.n0 <= Scalar(0) || audit.c0 < Scalar(-1e-8)) {
    audit.bound_satisfied = audit.c0 >= Scalar(-1e-8);
    return audit;
  }
  const Scalar c0_pos = std::max(audit.c0, Scalar(0));
  Scalar running_min = kInf<Scalar>;
  for (size_t k = 0; k < report.trace.size(); ++k) {
    running_min = std::min(running_min, report.trace[k].eps_abs);
    const Scalar rhs = std::sqrt(c0_pos / audit.n0) / std::sqrt(Scalar(k + 1));
    if (running_min > rhs * (Scalar(1) + Scalar(1e-9)) + Scalar(1e-12)) {
      audit.bound_satisfied = false;
      break;
    }
  }
  return audit;
}

}  // namespace splitsqp
