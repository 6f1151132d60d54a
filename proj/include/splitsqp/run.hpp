#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "splitsqp/bench.hpp"
#include "splitsqp/epd_data.hpp"
#include "splitsqp/report_io.hpp"
#include "splitsqp/solver.hpp"

namespace splitsqp {

/// Parameter presets for the two benchmark families.
inline SolverParams<double> hs118_params() {
  SolverParams<double> params;
  params.rho = 0.45;
  params.sigma = 0.9;
  params.split_exp_dir = 1.01;
  params.split_mu_cap = 500;
  params.split_gap_scale = 7000;
  params.termination = TerminationMode::Absolute;
  params.eps = 1e-8;
  return params;
}

inline SolverParams<double> epd_params(bool valve_point) {
  SolverParams<double> params;
  params.rho = valve_point ? 0.45 : 0.49;
  params.sigma = valve_point ? 0.85 : 0.8;
  params.beta = valve_point ? 75 : 200;
  params.xi = 0.001;
  params.termination = TerminationMode::Relative;
  params.eps = 0.005;
  return params;
}

struct RunConfig {
  enum class Benchmark { Hs118, Epd };

  Benchmark benchmark = Benchmark::Hs118;
  Index q = 5;

  std::string units_file;
  Index periods = 0;  // 0: use the file's full load profile
  std::vector<int> replicate;
  std::optional<double> load_scale;
  bool valve_point = false;
  int delta = 2;

  SolverParams<double> params = hs118_params();
  std::vector<double> c_sweep;  // empty: single run at params.c
  bool baseline = false;        // also run the always-coupled variant
  ReportFormat format = ReportFormat::Human;
  std::string out_path;  // empty: stdout
  unsigned long seed = 0;
};

struct RunOutcome {
  std::vector<double> c_values;
  std::vector<SolveReport<double>> reports;
  std::optional<SolveReport<double>> baseline;
  std::vector<double> re_f_percent;  // vs. baseline, one entry per report
  int exit_status = 0;
};

namespace detail {

inline std::string suffixed_path(const std::string& path, const std::string& tag) {
  if (path.empty()) return path;
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || dot == 0) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

}  // namespace detail

/// Builds the configured instance, runs one solve per requested c value
/// (plus the always-coupled baseline when asked), and emits one report
/// artifact per run. Exit status is zero only when every run converged.
inline RunOutcome run_benchmark(const RunConfig& config, std::ostream& log = std::cout) {
  BuiltProblem<double> built;
  Point<double> start;
  VectorX<double> lambda0;

  if (config.benchmark == RunConfig::Benchmark::Hs118) {
    built = build_hs118<double>(config.q);
    start = find_feasible_start(built.problem);
    lambda0.resize(0);
  } else {
    EpdFamily<double> family = load_epd_units<double>(config.units_file);
    if (!config.replicate.empty())
      family = replicate_units(family, config.replicate, config.load_scale);
    if (config.periods > 0) truncate_horizon(family, config.periods);
    family.valve_point = config.valve_point;
    family.delta = config.delta;
    built = build_epd(family);
    start = epd_initial_point(family);
    lambda0 = epd_initial_multiplier(family);
  }

  RunOutcome outcome;
  outcome.c_values = config.c_sweep.empty() ? std::vector<double>{config.params.c}
                                            : config.c_sweep;

  const bool multiple = outcome.c_values.size() > 1 || config.baseline;
  for (double c : outcome.c_values) {
    SolverParams<double> params = config.params;
    params.c = c;
    SolveReport<double> report = solve(built.problem, start.x, start.y, lambda0, params);
    if (!is_converged(report.reason)) outcome.exit_status = 1;

    std::ostringstream tag;
    tag << "_c" << c;
    const std::string path =
        multiple ? detail::suffixed_path(config.out_path, tag.str()) : config.out_path;
    if (!path.empty())
      emit_report(report, config.format, path);
    else
      emit_report(report, config.format, log);
    outcome.reports.push_back(std::move(report));
  }

  if (config.baseline) {
    SolverParams<double> params = config.params;
    params.distributed = false;
    SolveReport<double> base = solve(built.problem, start.x, start.y, lambda0, params);
    if (!is_converged(base.reason)) outcome.exit_status = 1;
    const std::string path = detail::suffixed_path(config.out_path, "_baseline");
    if (!path.empty())
      emit_report(base, config.format, path);
    else
      emit_report(base, config.format, log);
    for (const auto& report : outcome.reports)
      outcome.re_f_percent.push_back((report.objective - base.objective) /
                                     std::abs(base.objective) * 100.0);
    outcome.baseline = std::move(base);
  }

  if (multiple) {
    log << "\nrun summary\n";
    log << "  c        iters  split  ratio   objective          time[s]   status\n";
    double cumulative = 0;
    for (size_t i = 0; i < outcome.reports.size(); ++i) {
      const auto& rep = outcome.reports[i];
      cumulative += rep.wall_seconds;
      std::ostringstream row;
      row.setf(std::ios::left);
      row.width(9);
      row << outcome.c_values[i];
      log << "  " << row.str() << rep.n_iter << "      " << rep.n_split_iter << "     "
          << rep.splitting_ratio << "   " << rep.objective << "   " << rep.wall_seconds << "  "
          << to_string(rep.reason);
      if (!outcome.re_f_percent.empty()) log << "  RE_F " << outcome.re_f_percent[i] << "%";
      log << "\n";
    }
    if (outcome.baseline)
      log << "  baseline " << outcome.baseline->n_iter << " iters, objective "
          << outcome.baseline->objective << ", " << outcome.baseline->wall_seconds << " s, "
          << to_string(outcome.baseline->reason) << "\n";
    log << "  cumulative wall time " << cumulative << " s\n";
  }
  return outcome;
}

}  // namespace splitsqp
