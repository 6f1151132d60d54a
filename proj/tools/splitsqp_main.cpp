#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splitsqp/run.hpp"
#include "splitsqp/verify.hpp"

namespace {

using splitsqp::Index;
using splitsqp::RunConfig;

struct SolverFlagRefs {
  CLI::Option* rho = nullptr;
  CLI::Option* sigma = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* xi = nullptr;
};

SolverFlagRefs add_solver_flags(CLI::App* cmd, splitsqp::SolverParams<double>& params) {
  SolverFlagRefs refs;
  cmd->add_option("--c", params.c, "inequality contraction parameter in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  refs.rho = cmd->add_option("--rho", params.rho, "sufficient-decrease slope in (0,1)");
  refs.sigma = cmd->add_option("--sigma", params.sigma, "backtracking ratio in (0,1)");
  refs.beta = cmd->add_option("--beta", params.beta, "equality penalty");
  refs.xi = cmd->add_option("--xi", params.xi, "multiplier step length");
  cmd->add_option("--eps", params.eps, "termination accuracy");
  cmd->add_option("--max-iter", params.max_iter, "outer iteration cap");
  cmd->add_option("--max-linesearch", params.max_linesearch, "backtracking cap");
  cmd->add_option("--split-exp-dir", params.split_exp_dir,
                  "splitting-test exponent on the direction norm");
  cmd->add_option("--split-exp-res", params.split_exp_res,
                  "splitting-test exponent on the equality residual");
  cmd->add_option("--split-mu-cap", params.split_mu_cap,
                  "cap on the smaller inequality-multiplier norm");
  cmd->add_option("--split-gap-scale", params.split_gap_scale,
                  "scale of the multiplier-gap budget");
  cmd->add_option("--split-res-weight", params.split_res_weight,
                  "equality-residual weight in the gap budget");
  cmd->add_option("--feas-tol", params.feas_tol, "partial-feasibility tolerance");
  cmd->add_flag("--no-split{false}", params.distributed,
                "skip the split subproblems (always-coupled variant)");
  std::map<std::string, splitsqp::TerminationMode> modes{
      {"abs", splitsqp::TerminationMode::Absolute},
      {"rel", splitsqp::TerminationMode::Relative}};
  cmd->add_option("--termination", params.termination, "stopping criterion: abs or rel")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  std::map<std::string, splitsqp::HessianMode> hessians{
      {"exact", splitsqp::HessianMode::ExactRegularized},
      {"identity", splitsqp::HessianMode::Identity}};
  cmd->add_option("--hessian", params.hessian_mode, "curvature model: exact or identity")
      ->transform(CLI::CheckedTransformer(hessians, CLI::ignore_case));
  return refs;
}

void add_output_flags(CLI::App* cmd, RunConfig& config) {
  std::map<std::string, splitsqp::ReportFormat> formats{
      {"human", splitsqp::ReportFormat::Human},
      {"json", splitsqp::ReportFormat::Json},
      {"csv", splitsqp::ReportFormat::Csv}};
  cmd->add_option("--format", config.format, "report format: human, json or csv")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  cmd->add_option("--out", config.out_path, "report output path (default: stdout)");
  cmd->add_option("--seed", config.seed, "seed for randomized checks");
  cmd->add_flag("--baseline", config.baseline,
                "also run the always-coupled variant and report RE_F");
}

void add_epd_family_flags(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--units-file", config.units_file, "unit data file")->required();
  cmd->add_option("--T", config.periods, "number of periods (prefix of the load profile)");
  cmd->add_option("--replicate", config.replicate,
                  "copy counts per base unit, e.g. --replicate 3,3,3,3,3")
      ->delimiter(',');
  cmd->add_option("--load-scale", config.load_scale,
                  "load scaling factor for replication (default: capacity ratio)");
  cmd->add_flag("--valve-point", config.valve_point, "enable the valve-point ripple term");
  cmd->add_option("--delta", config.delta, "ripple exponent (2 smooth, 1 evaluation-only)")
      ->check(CLI::IsMember({1, 2}));
}

// The valve-point experiments use their own rho/sigma/beta presets; apply
// them for flags the user left untouched.
void apply_valve_presets(const SolverFlagRefs& refs, splitsqp::SolverParams<double>& params) {
  const auto preset = splitsqp::epd_params(true);
  if (refs.rho->count() == 0) params.rho = preset.rho;
  if (refs.sigma->count() == 0) params.sigma = preset.sigma;
  if (refs.beta->count() == 0) params.beta = preset.beta;
  if (refs.xi->count() == 0) params.xi = preset.xi;
}

int run_verify(unsigned long seed, int qp_instances, const std::string& units_file) {
  using namespace splitsqp;
  std::vector<CheckResult> checks;

  const auto fuzz = qp_fuzz_against_oracle<double>(qp_instances, seed, 1e-8, 1e-6);
  {
    std::ostringstream detail;
    detail << fuzz.instances << " instances, max primal diff " << fuzz.max_primal_diff
           << ", max dual diff " << fuzz.max_dual_diff;
    checks.push_back(make_check(
        "active-set solve vs enumeration oracle",
        fuzz.disagreements == 0 && fuzz.infeasible_misclassifications == 0, detail.str()));
  }

  for (Index q : {Index(5), Index(8)}) {
    const std::string label = "hs118 q=" + std::to_string(q) + ": ";
    const auto built = build_hs118<double>(q);
    for (auto& check : derivative_checks(built.problem, 1.0, 20, seed + static_cast<unsigned>(q)))
      checks.push_back({label + check.name, check.pass, check.detail});
    auto params = hs118_params();
    const auto start = find_feasible_start(built.problem);
    const auto report = solve(built.problem, start.x, start.y, VectorX<double>(0), params);
    checks.push_back(
        make_check(label + "converged", is_converged(report.reason), to_string(report.reason)));
    for (auto& check : invariant_checks(report, params))
      checks.push_back({label + check.name, check.pass, check.detail});
  }

  if (!units_file.empty()) {
    for (bool valve : {false, true}) {
      EpdFamily<double> family = load_epd_units<double>(units_file);
      family.valve_point = valve;
      const auto built = build_epd(family);
      const std::string label = valve ? "epd(valve): " : "epd: ";
      auto params = epd_params(valve);
      for (auto& check : derivative_checks(built.problem, params.beta, 20, seed))
        checks.push_back({label + check.name, check.pass, check.detail});
      const auto start = epd_initial_point(family);
      const auto report =
          solve(built.problem, start.x, start.y, epd_initial_multiplier(family), params);
      checks.push_back(
          make_check(label + "converged", is_converged(report.reason), to_string(report.reason)));
      for (auto& check : invariant_checks(report, params))
        checks.push_back({label + check.name, check.pass, check.detail});
    }
  }

  int failures = 0;
  for (const auto& check : checks) {
    std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name;
    if (!check.detail.empty()) std::cout << "  (" << check.detail << ")";
    std::cout << "\n";
    if (!check.pass) ++failures;
  }
  std::cout << (failures == 0 ? "all checks passed\n"
                              : std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-block split-SQP solver and benchmark harness"};
  app.require_subcommand(1);
  app.set_config("--config");

  RunConfig hs_config;
  hs_config.params = splitsqp::hs118_params();
  auto* hs = app.add_subcommand("hs118", "run the generalized HS118 family");
  hs->add_option("--q", hs_config.q, "scale parameter (>= 5)")
      ->check(CLI::Range(Index(5), Index(1000000)));
  hs->add_option("--sweep-c", hs_config.c_sweep, "run once per listed c value")->delimiter(',');
  add_solver_flags(hs, hs_config.params);
  add_output_flags(hs, hs_config);

  RunConfig epd_config;
  epd_config.benchmark = RunConfig::Benchmark::Epd;
  epd_config.params = splitsqp::epd_params(false);
  auto* epd = app.add_subcommand("epd", "run the economic dispatch family");
  add_epd_family_flags(epd, epd_config);
  const SolverFlagRefs epd_refs = add_solver_flags(epd, epd_config.params);
  add_output_flags(epd, epd_config);

  RunConfig sweep_config;
  sweep_config.c_sweep = {0.0, 0.5, 1.0};
  auto* sweep = app.add_subcommand("sweep", "c-parameter sweep over a benchmark");
  std::map<std::string, RunConfig::Benchmark> benchmarks{
      {"hs118", RunConfig::Benchmark::Hs118}, {"epd", RunConfig::Benchmark::Epd}};
  sweep->add_option("--benchmark", sweep_config.benchmark, "family to sweep: hs118 or epd")
      ->transform(CLI::CheckedTransformer(benchmarks, CLI::ignore_case));
  sweep->add_option("--q", sweep_config.q, "scale parameter for hs118");
  sweep->add_option("--units-file", sweep_config.units_file, "unit data file for epd");
  sweep->add_option("--T", sweep_config.periods, "number of periods for epd");
  sweep->add_option("--c-list", sweep_config.c_sweep, "c values to run")->delimiter(',');
  const SolverFlagRefs sweep_refs = add_solver_flags(sweep, sweep_config.params);
  add_output_flags(sweep, sweep_config);

  unsigned long verify_seed = 12345;
  int verify_qp_instances = 1000;
  std::string verify_units;
  auto* verify = app.add_subcommand("verify", "run the invariant and oracle suites");
  verify->add_option("--seed", verify_seed, "seed for randomized checks");
  verify->add_option("--qp-instances", verify_qp_instances, "fuzz instance count");
  verify->add_option("--units-file", verify_units, "also verify the dispatch family");

  CLI11_PARSE(app, argc, argv);

  try {
    if (hs->parsed()) return splitsqp::run_benchmark(hs_config).exit_status;
    if (epd->parsed()) {
      if (epd_config.valve_point) apply_valve_presets(epd_refs, epd_config.params);
      return splitsqp::run_benchmark(epd_config).exit_status;
    }
    if (sweep->parsed()) {
      if (sweep_config.benchmark == RunConfig::Benchmark::Epd) {
        if (sweep_config.units_file.empty())
          throw splitsqp::SolveError("sweep over epd needs --units-file");
        auto preset = splitsqp::epd_params(false);
        if (sweep_refs.rho->count() == 0) sweep_config.params.rho = preset.rho;
        if (sweep_refs.sigma->count() == 0) sweep_config.params.sigma = preset.sigma;
        if (sweep_refs.beta->count() == 0) sweep_config.params.beta = preset.beta;
        if (sweep_refs.xi->count() == 0) sweep_config.params.xi = preset.xi;
        sweep_config.params.termination = splitsqp::TerminationMode::Relative;
        sweep_config.params.eps = 0.005;
      }
      return splitsqp::run_benchmark(sweep_config).exit_status;
    }
    if (verify->parsed()) return run_verify(verify_seed, verify_qp_instances, verify_units);
  } catch (const splitsqp::DataFileError& e) {
    std::cerr << "unit file error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
