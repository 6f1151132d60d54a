#include <doctest.h>

#include <random>

#include "splitsqp/alf.hpp"
#include "splitsqp/bench.hpp"
#include "splitsqp/qp.hpp"
#include "splitsqp/solver.hpp"
#include "test_support.hpp"

using namespace splitsqp;

namespace {

// Quadratic two-block instance with an equality block, a joint inequality
// row and boxes, sized so everything stays easy to reason about.
TwoBlockProblem<double> coupled_instance(std::mt19937_64& rng) {
  auto p = test::quadratic_problem<double>(test::random_vector(rng, 3),
                                           test::random_vector(rng, 2));
  p.A = MatrixX<double>::Random(2, 3);
  p.B = MatrixX<double>::Random(2, 2);
  p.b = test::random_vector(rng, 2, -1, 1);
  p.E = MatrixX<double>::Ones(1, 3);
  p.F = MatrixX<double>::Ones(1, 2);
  p.d = VectorX<double>::Constant(1, 25.0);
  p.C = MatrixX<double>::Identity(3, 3);
  p.l = VectorX<double>::Constant(3, -10.0);
  p.v = VectorX<double>::Constant(3, 10.0);
  p.D = MatrixX<double>::Identity(2, 2);
  p.s = VectorX<double>::Constant(2, -10.0);
  p.r = VectorX<double>::Constant(2, 10.0);
  return p;
}

SqpStepData<double> step_data_at(const TwoBlockProblem<double>& p, const VectorX<double>& x,
                                 const VectorX<double>& y, const VectorX<double>& lambda,
                                 double beta) {
  SqpStepData<double> step;
  step.x = x;
  step.y = y;
  step.lambda = lambda;
  step.beta = beta;
  step.grad_f = p.f_grad(x);
  step.grad_theta = p.theta_grad(y);
  step.eq_residual = p.equality_residual(x, y);
  step.h = p.inequality_value(x, y);
  step.hess = make_hessian_blocks(p, MatrixX<double>(p.f_hess(x)),
                                  MatrixX<double>(p.theta_hess(y)), beta);
  return step;
}

// Eq-style merit of the coupled quadratic model, recomputed term by term.
double coupled_model_value(const TwoBlockProblem<double>& p, const SqpStepData<double>& step,
                           const VectorX<double>& x, const VectorX<double>& y) {
  const VectorX<double> dx = x - step.x;
  const VectorX<double> dy = y - step.y;
  double value = step.grad_f.dot(dx) + 0.5 * dx.dot(step.hess.Hx * dx) +
                 step.grad_theta.dot(dy) + 0.5 * dy.dot(step.hess.Hy * dy);
  if (p.m1() > 0) {
    const VectorX<double> res = p.equality_residual(x, y);
    value += -step.lambda.dot(res) + 0.5 * step.beta * res.squaredNorm();
  }
  return value;
}

}  // namespace

TEST_CASE("without equality rows the merit equals the objective") {
  const auto built = build_hs118<double>(5);
  const auto u = to_blocks(hs118_known_optimum<double>(), built.split);
  AlfContext<double> ctx{&built.problem, 7.5, VectorX<double>(0)};
  CHECK(alf_value(ctx, u) == eval_objective(built.problem, u));
}

TEST_CASE("penalty-only merit arithmetic") {
  auto p = test::zero_problem<double>(2, 1);
  p.A = MatrixX<double>::Identity(2, 2);
  p.B = MatrixX<double>::Zero(2, 1);
  p.b = VectorX<double>::Zero(2);
  AlfContext<double> ctx{&p, 2.0, VectorX<double>(VectorX<double>::Zero(2))};
  CHECK(alf_value(ctx, VectorX<double>(VectorX<double>::Ones(2)),
                  VectorX<double>(VectorX<double>::Zero(1))) == doctest::Approx(2.0));
}

TEST_CASE("merit value matches a term-by-term oracle") {
  std::mt19937_64 rng(4);
  const auto a = test::random_vector(rng, 3);
  const auto b = test::random_vector(rng, 2);
  auto p = test::quadratic_problem<double>(a, b);
  p.A = MatrixX<double>::Random(2, 3);
  p.B = MatrixX<double>::Random(2, 2);
  p.b = test::random_vector(rng, 2, -1, 1);
  for (int i = 0; i < 10; ++i) {
    const auto x = test::random_vector(rng, 3);
    const auto y = test::random_vector(rng, 2);
    const auto lambda = test::random_vector(rng, 2, -2, 2);
    const double beta = 3.25;
    AlfContext<double> ctx{&p, beta, lambda};

    double by_hand = 0;
    for (Index j = 0; j < 3; ++j) by_hand += 0.5 * (x[j] - a[j]) * (x[j] - a[j]);
    for (Index j = 0; j < 2; ++j) by_hand += 0.5 * (y[j] - b[j]) * (y[j] - b[j]);
    for (Index row = 0; row < 2; ++row) {
      double res = -p.b[row];
      for (Index j = 0; j < 3; ++j) res += p.A(row, j) * x[j];
      for (Index j = 0; j < 2; ++j) res += p.B(row, j) * y[j];
      by_hand += -lambda[row] * res + 0.5 * beta * res * res;
    }
    CHECK(alf_value(ctx, x, y) == doctest::Approx(by_hand).epsilon(1e-12));
  }
}

TEST_CASE("merit gradient agrees with finite differences") {
  std::mt19937_64 rng(9);
  const auto p = coupled_instance(rng);
  AlfContext<double> ctx{&p, 2.5, test::random_vector(rng, 2, -1, 1)};
  for (int i = 0; i < 20; ++i) {
    const auto x = test::random_vector(rng, 3);
    const auto y = test::random_vector(rng, 2);
    const VectorX<double> grad = alf_gradient(ctx, x, y);
    VectorX<double> stacked(5);
    stacked << x, y;
    VectorX<double> numeric(5);
    for (Index j = 0; j < 5; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(stacked[j]));
      VectorX<double> hi = stacked, lo = stacked;
      hi[j] += h;
      lo[j] -= h;
      numeric[j] = (alf_value(ctx, VectorX<double>(hi.head(3)), VectorX<double>(hi.tail(2))) -
                    alf_value(ctx, VectorX<double>(lo.head(3)), VectorX<double>(lo.tail(2)))) /
                   (2 * h);
    }
    CHECK((numeric - grad).lpNorm<Eigen::Infinity>() <=
          1e-6 * (1.0 + grad.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("without coupling the merit gradient is the plain gradient") {
  std::mt19937_64 rng(2);
  const auto p = test::quadratic_problem<double>(test::random_vector(rng, 3),
                                                 test::random_vector(rng, 2));
  AlfContext<double> ctx{&p, 1.0, VectorX<double>(0)};
  const auto x = test::random_vector(rng, 3);
  const auto y = test::random_vector(rng, 2);
  const VectorX<double> grad = alf_gradient(ctx, x, y);
  CHECK((grad.head(3) - p.f_grad(x)).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((grad.tail(2) - p.theta_grad(y)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("the merit gradient vanishes at its stationary point") {
  std::mt19937_64 rng(6);
  const auto a = test::random_vector(rng, 3);
  const auto b = test::random_vector(rng, 2);
  auto p = test::quadratic_problem<double>(a, b);
  p.A = MatrixX<double>::Random(1, 3);
  p.B = MatrixX<double>::Random(1, 2);
  p.b = VectorX<double>::Constant(1, 0.7);
  const double beta = 4.0;
  const VectorX<double> lambda = VectorX<double>::Constant(1, 0.3);

  MatrixX<double> M(1, 5);
  M << p.A, p.B;
  VectorX<double> u0(5);
  u0 << a, b;
  // stationarity: (I + beta M^T M) u = u0 + M^T (lambda + beta b)
  const MatrixX<double> K =
      MatrixX<double>::Identity(5, 5) + beta * M.transpose() * M;
  const VectorX<double> rhs = u0 + M.transpose() * (lambda + beta * p.b);
  const VectorX<double> u_star = K.ldlt().solve(rhs);

  AlfContext<double> ctx{&p, beta, lambda};
  const VectorX<double> grad =
      alf_gradient(ctx, VectorX<double>(u_star.head(3)), VectorX<double>(u_star.tail(2)));
  CHECK(grad.lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("contraction transfers to the subproblem right-hand side") {
  std::mt19937_64 rng(14);
  const auto p = coupled_instance(rng);
  VectorX<double> x = VectorX<double>::Zero(3);
  VectorX<double> y = VectorX<double>::Zero(2);
  auto step = step_data_at(p, x, y, VectorX<double>::Zero(2), 2.0);
  REQUIRE(step.h.maxCoeff() < 0.0);  // strictly inside the joint inequality

  const auto qp0 = build_split_x_qp(p, step, 0.0);
  CHECK((qp0.h - (p.d - p.F * y)).lpNorm<Eigen::Infinity>() == 0.0);

  // all rows active: the contraction term vanishes
  auto step_active = step;
  step_active.h.setZero();
  const auto qp1 = build_split_x_qp(p, step_active, 1.0);
  const auto qp1_zero_c = build_split_x_qp(p, step_active, 0.0);
  CHECK((qp1.h - qp1_zero_c.h).lpNorm<Eigen::Infinity>() == 0.0);

  const auto qpy0 = build_split_y_qp(p, step, 0.0);
  CHECK((qpy0.h - (p.d - p.E * x)).lpNorm<Eigen::Infinity>() == 0.0);

  // the current point satisfies its own subproblem for every c
  for (double c : {0.0, 0.3, 0.7, 1.0}) {
    const auto qx = build_split_x_qp(p, step, c);
    CHECK((qx.G * x - qx.h).maxCoeff() <= 0.0);
    const auto qy = build_split_y_qp(p, step, c);
    CHECK((qy.G * y - qy.h).maxCoeff() <= 0.0);
  }
}

TEST_CASE("split solutions satisfy the stationarity system of the x subproblem") {
  std::mt19937_64 rng(23);
  const auto p = coupled_instance(rng);
  const VectorX<double> x = VectorX<double>::Zero(3);
  const VectorX<double> y = VectorX<double>::Zero(2);
  const VectorX<double> lambda = test::random_vector(rng, 2, -1, 1);
  const auto step = step_data_at(p, x, y, lambda, 2.0);

  for (double c : {0.0, 0.5, 1.0}) {
    const auto qp = build_split_x_qp(p, step, c);
    QpOptions<double> opts;
    opts.start = x;
    const auto sol = solve_qp(qp, opts);
    const VectorX<double> dx = sol.z - x;
    // grad f + calHx d - A^T (lambda - beta res) + E^T mu + C^T (gamma - alpha) = 0
    VectorX<double> residual = step.grad_f + step.hess.calHx * dx -
                               p.A.transpose() * step.shifted_multiplier() +
                               p.E.transpose() * sol.mu +
                               p.C.transpose() * (sol.gamma - sol.alpha);
    CHECK(residual.lpNorm<Eigen::Infinity>() <= 1e-8);

    const auto qpy = build_split_y_qp(p, step, c);
    QpOptions<double> oy;
    oy.start = y;
    const auto soly = solve_qp(qpy, oy);
    const VectorX<double> dy = soly.z - y;
    VectorX<double> residual_y = step.grad_theta + step.hess.calHy * dy -
                                 p.B.transpose() * step.shifted_multiplier() +
                                 p.F.transpose() * soly.mu +
                                 p.D.transpose() * (soly.gamma - soly.alpha);
    CHECK(residual_y.lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("the coupled subproblem separates when blocks do not interact") {
  std::mt19937_64 rng(37);
  auto p = test::quadratic_problem<double>(test::random_vector(rng, 3),
                                           test::random_vector(rng, 2));
  p.C = MatrixX<double>::Identity(3, 3);
  p.l = VectorX<double>::Constant(3, -0.5);
  p.v = VectorX<double>::Constant(3, 0.5);
  p.D = MatrixX<double>::Identity(2, 2);
  p.s = VectorX<double>::Constant(2, -0.5);
  p.r = VectorX<double>::Constant(2, 0.5);

  const VectorX<double> x = VectorX<double>::Zero(3);
  const VectorX<double> y = VectorX<double>::Zero(2);
  const auto step = step_data_at(p, x, y, VectorX<double>(0), 1.5);

  QpOptions<double> ox;
  ox.start = x;
  const auto sx = solve_qp(build_split_x_qp(p, step, 0.0), ox);
  QpOptions<double> oy;
  oy.start = y;
  const auto sy = solve_qp(build_split_y_qp(p, step, 0.0), oy);

  VectorX<double> u(5);
  u << x, y;
  QpOptions<double> oc;
  oc.start = u;
  const auto sc = solve_qp(build_coupled_qp(p, step), oc);

  CHECK((sc.z.head(3) - sx.z).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((sc.z.tail(2) - sy.z).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("a stationary interior point is the coupled minimizer") {
  auto p = test::quadratic_problem<double>(VectorX<double>::Zero(3), VectorX<double>::Zero(2));
  p.C = MatrixX<double>::Identity(3, 3);
  p.l = VectorX<double>::Constant(3, -1.0);
  p.v = VectorX<double>::Constant(3, 1.0);
  const VectorX<double> x = VectorX<double>::Zero(3);  // gradient vanishes here
  const VectorX<double> y = VectorX<double>::Zero(2);
  const auto step = step_data_at(p, x, y, VectorX<double>(0), 1.0);
  VectorX<double> u(5);
  u << x, y;
  QpOptions<double> opts;
  opts.start = u;
  const auto sol = solve_qp(build_coupled_qp(p, step), opts);
  CHECK((sol.z - u).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("coupled solutions satisfy the joint stationarity system") {
  std::mt19937_64 rng(41);
  const auto p = coupled_instance(rng);
  const VectorX<double> x = VectorX<double>::Zero(3);
  const VectorX<double> y = VectorX<double>::Zero(2);
  const VectorX<double> lambda = test::random_vector(rng, 2, -1, 1);
  const auto step = step_data_at(p, x, y, lambda, 2.0);
  const auto qp = build_coupled_qp(p, step);
  VectorX<double> u(5);
  u << x, y;
  QpOptions<double> opts;
  opts.start = u;
  const auto sol = solve_qp(qp, opts);

  const VectorX<double> dx = sol.z.head(3) - x;
  const VectorX<double> dy = sol.z.tail(2) - y;
  VectorX<double> rx = step.grad_f + step.hess.calHx * dx +
                       step.beta * p.A.transpose() * (p.B * dy) -
                       p.A.transpose() * step.shifted_multiplier() +
                       p.E.transpose() * sol.mu +
                       p.C.transpose() * (sol.gamma.head(3) - sol.alpha.head(3));
  VectorX<double> ry = step.grad_theta + step.hess.calHy * dy +
                       step.beta * p.B.transpose() * (p.A * dx) -
                       p.B.transpose() * step.shifted_multiplier() +
                       p.F.transpose() * sol.mu +
                       p.D.transpose() * (sol.gamma.tail(2) - sol.alpha.tail(2));
  CHECK(rx.lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(ry.lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("the assembled coupled objective equals the quadratic merit model") {
  std::mt19937_64 rng(53);
  const auto p = coupled_instance(rng);
  const VectorX<double> x = VectorX<double>::Zero(3);
  const VectorX<double> y = VectorX<double>::Zero(2);
  const auto step = step_data_at(p, x, y, test::random_vector(rng, 2, -1, 1), 2.0);
  const auto qp = build_coupled_qp(p, step);
  VectorX<double> u(5);
  u << x, y;
  QpOptions<double> opts;
  opts.start = u;
  const auto sol = solve_qp(qp, opts);

  auto qp_objective = [&](const VectorX<double>& z) {
    return 0.5 * z.dot(qp.H * z) + qp.g.dot(z);
  };
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (int k = 0; k < 10; ++k) {
    const VectorX<double> z = u + unit(rng) * (sol.z - u);  // feasible by convexity
    const double lhs = qp_objective(z) - qp_objective(u);
    const double rhs = coupled_model_value(p, step, VectorX<double>(z.head(3)),
                                           VectorX<double>(z.tail(2))) -
                       coupled_model_value(p, step, x, y);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("descent holds for split and coupled directions") {
  std::mt19937_64 rng(67);
  const auto p = coupled_instance(rng);
  const VectorX<double> x = VectorX<double>::Zero(3);
  const VectorX<double> y = VectorX<double>::Zero(2);
  const VectorX<double> lambda = test::random_vector(rng, 2, -1, 1);
  const auto step = step_data_at(p, x, y, lambda, 2.0);
  AlfContext<double> ctx{&p, step.beta, lambda};
  const VectorX<double> grad = alf_gradient(ctx, x, y);

  QpOptions<double> ox;
  ox.start = x;
  const auto sx = solve_qp(build_split_x_qp(p, step, 1.0), ox);
  QpOptions<double> oy;
  oy.start = y;
  const auto sy = solve_qp(build_split_y_qp(p, step, 1.0), oy);
  VectorX<double> d(5);
  d << sx.z - x, sy.z - y;
  const double metric = (sx.z - x).dot(step.hess.calHx * (sx.z - x)) +
                        (sy.z - y).dot(step.hess.calHy * (sy.z - y));
  CHECK(grad.dot(d) <= -metric + 1e-8 * (1.0 + d.squaredNorm()));

  const auto qp = build_coupled_qp(p, step);
  VectorX<double> u(5);
  u << x, y;
  QpOptions<double> oc;
  oc.start = u;
  const auto sc = solve_qp(qp, oc);
  const VectorX<double> dc = sc.z - u;
  CHECK(grad.dot(dc) <= -dc.dot(qp.H * dc) + 1e-8 * (1.0 + dc.squaredNorm()));
}
