#include <doctest.h>

#include <future>
#include <random>

#include "splitsqp/bench.hpp"
#include "splitsqp/epd_data.hpp"
#include "splitsqp/qp.hpp"
#include "splitsqp/run.hpp"
#include "splitsqp/verify.hpp"

using namespace splitsqp;

TEST_CASE("concurrent solves on distinct problems do not interfere") {
  const auto built_a = build_hs118<double>(8);
  const auto built_b = build_hs118<double>(12);
  const auto start_a = find_feasible_start(built_a.problem);
  const auto start_b = find_feasible_start(built_b.problem);
  const auto params = hs118_params();

  auto task_a = std::async(std::launch::async, [&] {
    return solve(built_a.problem, start_a.x, start_a.y, VectorX<double>(0), params);
  });
  auto task_b = std::async(std::launch::async, [&] {
    return solve(built_b.problem, start_b.x, start_b.y, VectorX<double>(0), params);
  });
  const auto report_a = task_a.get();
  const auto report_b = task_b.get();
  CHECK(is_converged(report_a.reason));
  CHECK(is_converged(report_b.reason));

  const auto serial_a = solve(built_a.problem, start_a.x, start_a.y, VectorX<double>(0), params);
  CHECK(report_a.objective == serial_a.objective);
  CHECK(report_a.n_iter == serial_a.n_iter);
}

TEST_CASE("repeated solves of the same configuration are bitwise identical") {
  const auto built = build_hs118<double>(20);
  const auto start = find_feasible_start(built.problem);
  const auto params = hs118_params();
  const auto first = solve(built.problem, start.x, start.y, VectorX<double>(0), params);
  const auto second = solve(built.problem, start.x, start.y, VectorX<double>(0), params);
  REQUIRE(first.n_iter == second.n_iter);
  CHECK(first.final.x == second.final.x);
  CHECK(first.final.y == second.final.y);
  CHECK(first.objective == second.objective);
  for (int k = 0; k < first.n_iter; ++k) {
    CHECK(first.trace[k].t == second.trace[k].t);
    CHECK(first.trace[k].dir_norm == second.trace[k].dir_norm);
    CHECK(first.trace[k].used_splitting == second.trace[k].used_splitting);
  }
}

TEST_CASE("nonsense warm-start hints do not change the minimizer") {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<Index> any_row(0, 30);
  for (int i = 0; i < 60; ++i) {
    const auto qp = random_feasible_qp<double>(rng, 5, 4, 3);
    const auto cold = solve_qp(qp);
    ActiveSet junk;
    for (int k = 0; k < 6; ++k) {
      junk.ineq.push_back(any_row(rng));  // mostly out of range on purpose
      junk.lower.push_back(any_row(rng));
      junk.upper.push_back(any_row(rng));
    }
    QpOptions<double> opts;
    opts.warm_start = junk;
    const auto warm = solve_qp(qp, opts);
    CHECK((warm.z - cold.z).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("random starts inside and outside the feasible set agree") {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  for (int i = 0; i < 60; ++i) {
    const auto qp = random_feasible_qp<double>(rng, 4, 3, 2);
    const auto reference = solve_qp(qp);
    QpOptions<double> opts;
    VectorX<double> anywhere(qp.n());
    for (Index j = 0; j < qp.n(); ++j) anywhere[j] = unit(rng);
    opts.start = anywhere;  // possibly infeasible: phase-1 must recover
    const auto sol = solve_qp(qp, opts);
    CHECK((sol.z - reference.z).lpNorm<Eigen::Infinity>() <= 1e-7);
  }
}

TEST_CASE("a replicated dispatch instance keeps every guarantee") {
  auto family = load_epd_units<double>(std::string(SPLITSQP_DATA_DIR) + "/epd_units_5.txt");
  family = replicate_units(family, {2, 2, 2, 2, 2});
  REQUIRE(family.n_units() == 10);
  const auto built = build_epd(family);
  CHECK(built.problem.n1 + built.problem.n2 == 10 * 24);
  const auto start = epd_initial_point(family);
  const auto params = epd_params(false);
  const auto report =
      solve(built.problem, start.x, start.y, epd_initial_multiplier(family), params);
  CHECK(report.reason == TerminationReason::RelativeTol);
  const VectorX<double> residual =
      built.problem.equality_residual(report.final.x, report.final.y);
  for (Index t = 0; t < family.n_periods(); ++t)
    CHECK(std::abs(residual[t]) <= 0.005 * family.load[t]);
  CHECK(report.feasibility.range_violation <= 1e-8);
  for (const auto& check : invariant_checks(report, params))
    CHECK_MESSAGE(check.pass, check.name, " ", check.detail);
}

TEST_CASE("split and coupled modes deliver comparable dispatch solutions") {
  auto family = load_epd_units<double>(std::string(SPLITSQP_DATA_DIR) + "/epd_units_5.txt");
  truncate_horizon(family, 8);
  const auto built = build_epd(family);
  const auto start = epd_initial_point(family);
  auto params = epd_params(false);
  const auto distributed =
      solve(built.problem, start.x, start.y, epd_initial_multiplier(family), params);
  params.distributed = false;
  const auto coupled =
      solve(built.problem, start.x, start.y, epd_initial_multiplier(family), params);
  CHECK(is_converged(distributed.reason));
  CHECK(is_converged(coupled.reason));
  // the stopping rule is a relative one, so the two runs halt at slightly
  // different points on the near-balanced manifold
  CHECK(std::abs(distributed.objective - coupled.objective) <=
        0.02 * (1.0 + std::abs(coupled.objective)));
  CHECK(built.problem.equality_residual(distributed.final.x, distributed.final.y)
            .lpNorm<Eigen::Infinity>() <= 0.005 * family.load.maxCoeff());
}
