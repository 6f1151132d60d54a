#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "splitsqp/bench.hpp"
#include "splitsqp/report_io.hpp"
#include "splitsqp/run.hpp"

using namespace splitsqp;

namespace {

SolveReport<double> solved_q5() {
  const auto built = build_hs118<double>(5);
  const auto start = find_feasible_start(built.problem);
  return solve(built.problem, start.x, start.y, VectorX<double>(0), hs118_params());
}

bool reports_equal(const SolveReport<double>& a, const SolveReport<double>& b) {
  if (a.final.x != b.final.x || a.final.y != b.final.y || a.final.lambda != b.final.lambda)
    return false;
  if (a.objective != b.objective || a.n_iter != b.n_iter || a.n_split_iter != b.n_split_iter)
    return false;
  if (a.splitting_ratio != b.splitting_ratio || a.reason != b.reason) return false;
  if (a.wall_seconds != b.wall_seconds) return false;
  if (a.kkt_residual_at_stop.has_value() != b.kkt_residual_at_stop.has_value()) return false;
  if (a.kkt_residual_at_stop && *a.kkt_residual_at_stop != *b.kkt_residual_at_stop) return false;
  if (a.feasibility.eq_residual_inf != b.feasibility.eq_residual_inf) return false;
  if (a.feasibility.h != b.feasibility.h) return false;
  if (a.trace.size() != b.trace.size()) return false;
  for (size_t i = 0; i < a.trace.size(); ++i) {
    const auto& ra = a.trace[i];
    const auto& rb = b.trace[i];
    if (ra.k != rb.k || ra.alf_before != rb.alf_before || ra.alf_after != rb.alf_after ||
        ra.objective_next != rb.objective_next || ra.dir_norm != rb.dir_norm ||
        ra.metric_sq != rb.metric_sq || ra.grad_dot_dir != rb.grad_dot_dir ||
        ra.eps_abs != rb.eps_abs || ra.eps_rel != rb.eps_rel || ra.t != rb.t ||
        ra.c_max != rb.c_max || ra.used_splitting != rb.used_splitting ||
        ra.eq_res_next != rb.eq_res_next ||
        ra.ineq_violation_next != rb.ineq_violation_next ||
        ra.range_violation_next != rb.range_violation_next ||
        ra.full_step_violation != rb.full_step_violation)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("json reports round-trip losslessly") {
  const auto report = solved_q5();
  const auto parsed =
      report_from_json<double>(nlohmann::json::parse(report_to_json(report).dump()));
  CHECK(reports_equal(report, parsed));
}

TEST_CASE("an empty-trace report is a valid artifact") {
  SolveReport<double> report;
  report.final.x = VectorX<double>::Ones(2);
  report.final.y = VectorX<double>::Zero(1);
  report.final.lambda.resize(0);
  report.objective = 4.5;
  report.feasibility.h.resize(0);
  report.reason = TerminationReason::KktExact;
  report.kkt_residual_at_stop = 0.0;

  std::ostringstream json_out;
  emit_report(report, ReportFormat::Json, json_out);
  const auto parsed = report_from_json<double>(nlohmann::json::parse(json_out.str()));
  CHECK(reports_equal(report, parsed));

  std::ostringstream csv_out;
  emit_report(report, ReportFormat::Csv, csv_out);
  CHECK(csv_out.str().rfind(kCsvHeader, 0) == 0);  // header only, no rows
  CHECK(csv_out.str() == std::string(kCsvHeader) + "\n");
}

TEST_CASE("csv rows carry a constant column count") {
  const auto report = solved_q5();
  std::ostringstream out;
  emit_report(report, ReportFormat::Csv, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  const auto count_columns = [](const std::string& s) {
    return std::count(s.begin(), s.end(), ',') + 1;
  };
  const auto expected = count_columns(line);
  size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(count_columns(line) == expected);
    ++rows;
  }
  CHECK(rows == static_cast<size_t>(report.n_iter));
}

TEST_CASE("termination labels round-trip") {
  for (auto reason : {TerminationReason::KktExact, TerminationReason::AbsoluteTol,
                      TerminationReason::RelativeTol, TerminationReason::MaxIter,
                      TerminationReason::LineSearchFail})
    CHECK(termination_reason_from_string(to_string(reason)) == reason);
  CHECK_THROWS_AS(termination_reason_from_string("nope"), SolveError);
}

TEST_CASE("benchmark runs emit one artifact per requested c") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "splitsqp_run_test";
  fs::create_directories(dir);

  RunConfig config;
  config.q = 5;
  config.c_sweep = {0.0, 1.0};
  config.baseline = true;
  config.format = ReportFormat::Json;
  config.out_path = (dir / "report.json").string();
  std::ostringstream log;
  const auto outcome = run_benchmark(config, log);

  CHECK(outcome.exit_status == 0);
  CHECK(outcome.reports.size() == 2);
  REQUIRE(outcome.baseline.has_value());
  CHECK(outcome.re_f_percent.size() == 2);
  for (double re : outcome.re_f_percent) CHECK(std::abs(re) < 0.01);

  for (const char* name : {"report_c0.json", "report_c1.json", "report_baseline.json"}) {
    std::ifstream in(dir / name);
    REQUIRE_MESSAGE(in.good(), name);
    nlohmann::json j;
    in >> j;
    const auto parsed = report_from_json<double>(j);
    CHECK(is_converged(parsed.reason));
  }
  CHECK(log.str().find("run summary") != std::string::npos);
  fs::remove_all(dir);
}
