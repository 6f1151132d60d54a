#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "splitsqp/solver.hpp"

namespace splitsqp {

enum class ReportFormat { Human, Json, Csv };

inline const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::KktExact:
      return "kkt_exact";
    case TerminationReason::AbsoluteTol:
      return "absolute_tol";
    case TerminationReason::RelativeTol:
      return "relative_tol";
    case TerminationReason::MaxIter:
      return "max_iter";
    default:
      return "line_search_fail";
  }
}

inline TerminationReason termination_reason_from_string(const std::string& name) {
  if (name == "kkt_exact") return TerminationReason::KktExact;
  if (name == "absolute_tol") return TerminationReason::AbsoluteTol;
  if (name == "relative_tol") return TerminationReason::RelativeTol;
  if (name == "max_iter") return TerminationReason::MaxIter;
  if (name == "line_search_fail") return TerminationReason::LineSearchFail;
  throw SolveError("unknown termination reason: " + name);
}

namespace detail {

template <typename Scalar>
nlohmann::json to_json(const VectorX<Scalar>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(static_cast<double>(v[i]));
  return arr;
}

template <typename Scalar>
VectorX<Scalar> vector_from_json(const nlohmann::json& arr) {
  VectorX<Scalar> v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i)
    v[i] = Scalar(arr[static_cast<size_t>(i)].get<double>());
  return v;
}

}  // namespace detail

template <typename Scalar>
nlohmann::json report_to_json(const SolveReport<Scalar>& report) {
  nlohmann::json j;
  j["final"]["x"] = detail::to_json(report.final.x);
  j["final"]["y"] = detail::to_json(report.final.y);
  j["final"]["lambda"] = detail::to_json(report.final.lambda);
  j["objective"] = static_cast<double>(report.objective);
  j["feasibility"] = {
      {"eq_residual_inf", static_cast<double>(report.feasibility.eq_residual_inf)},
      {"ineq_violation", static_cast<double>(report.feasibility.ineq_violation)},
      {"range_violation", static_cast<double>(report.feasibility.range_violation)},
      {"h", detail::to_json(report.feasibility.h)},
  };
  j["n_iter"] = report.n_iter;
  j["n_split_iter"] = report.n_split_iter;
  j["splitting_ratio"] = static_cast<double>(report.splitting_ratio);
  j["termination"] = to_string(report.reason);
  j["wall_seconds"] = report.wall_seconds;
  if (report.kkt_residual_at_stop)
    j["kkt_residual_at_stop"] = static_cast<double>(*report.kkt_residual_at_stop);
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& rec : report.trace) {
    trace.push_back({
        {"k", rec.k},
        {"alf", static_cast<double>(rec.alf_before)},
        {"alf_next", static_cast<double>(rec.alf_after)},
        {"objective_next", static_cast<double>(rec.objective_next)},
        {"dir_norm", static_cast<double>(rec.dir_norm)},
        {"metric_sq", static_cast<double>(rec.metric_sq)},
        {"grad_dot_dir", static_cast<double>(rec.grad_dot_dir)},
        {"eps_abs", static_cast<double>(rec.eps_abs)},
        {"eps_rel", static_cast<double>(rec.eps_rel)},
        {"t", static_cast<double>(rec.t)},
        {"c_max", static_cast<double>(rec.c_max)},
        {"split", rec.used_splitting},
        {"eq_res_next", static_cast<double>(rec.eq_res_next)},
        {"ineq_violation_next", static_cast<double>(rec.ineq_violation_next)},
        {"range_violation_next", static_cast<double>(rec.range_violation_next)},
        {"full_step_violation", static_cast<double>(rec.full_step_violation)},
    });
  }
  j["trace"] = trace;
  return j;
}

template <typename Scalar>
SolveReport<Scalar> report_from_json(const nlohmann::json& j) {
  SolveReport<Scalar> report;
  report.final.x = detail::vector_from_json<Scalar>(j.at("final").at("x"));
  report.final.y = detail::vector_from_json<Scalar>(j.at("final").at("y"));
  report.final.lambda = detail::vector_from_json<Scalar>(j.at("final").at("lambda"));
  report.objective = Scalar(j.at("objective").get<double>());
  const auto& feas = j.at("feasibility");
  report.feasibility.eq_residual_inf = Scalar(feas.at("eq_residual_inf").get<double>());
  report.feasibility.ineq_violation = Scalar(feas.at("ineq_violation").get<double>());
  report.feasibility.range_violation = Scalar(feas.at("range_violation").get<double>());
  report.feasibility.h = detail::vector_from_json<Scalar>(feas.at("h"));
  report.n_iter = j.at("n_iter").get<int>();
  report.n_split_iter = j.at("n_split_iter").get<int>();
  report.splitting_ratio = Scalar(j.at("splitting_ratio").get<double>());
  report.reason = termination_reason_from_string(j.at("termination").get<std::string>());
  report.wall_seconds = j.at("wall_seconds").get<double>();
  if (j.contains("kkt_residual_at_stop"))
    report.kkt_residual_at_stop = Scalar(j.at("kkt_residual_at_stop").get<double>());
  for (const auto& row : j.at("trace")) {
    IterationRecord<Scalar> rec;
    rec.k = row.at("k").get<int>();
    rec.alf_before = Scalar(row.at("alf").get<double>());
    rec.alf_after = Scalar(row.at("alf_next").get<double>());
    rec.objective_next = Scalar(row.at("objective_next").get<double>());
    rec.dir_norm = Scalar(row.at("dir_norm").get<double>());
    rec.metric_sq = Scalar(row.at("metric_sq").get<double>());
    rec.grad_dot_dir = Scalar(row.at("grad_dot_dir").get<double>());
    rec.eps_abs = Scalar(row.at("eps_abs").get<double>());
    rec.eps_rel = Scalar(row.at("eps_rel").get<double>());
    rec.t = Scalar(row.at("t").get<double>());
    rec.c_max = Scalar(row.at("c_max").get<double>());
    rec.used_splitting = row.at("split").get<bool>();
    rec.eq_res_next = Scalar(row.at("eq_res_next").get<double>());
    rec.ineq_violation_next = Scalar(row.at("ineq_violation_next").get<double>());
    rec.range_violation_next = Scalar(row.at("range_violation_next").get<double>());
    rec.full_step_violation = Scalar(row.at("full_step_violation").get<double>());
    report.trace.push_back(rec);
  }
  return report;
}

inline constexpr const char* kCsvHeader =
    "k,alf,alf_next,objective_next,dir_norm,metric_sq,grad_dot_dir,eps_abs,eps_rel,t,c_max,"
    "split,eq_res_next,ineq_violation_next,range_violation_next,full_step_violation";

template <typename Scalar>
void write_csv(const SolveReport<Scalar>& report, std::ostream& out) {
  out << kCsvHeader << "\n";
  out.precision(17);
  for (const auto& rec : report.trace) {
    out << rec.k << ',' << rec.alf_before << ',' << rec.alf_after << ',' << rec.objective_next
        << ',' << rec.dir_norm << ',' << rec.metric_sq << ',' << rec.grad_dot_dir << ','
        << rec.eps_abs << ',' << rec.eps_rel << ',' << rec.t << ',' << rec.c_max << ','
        << (rec.used_splitting ? 1 : 0) << ',' << rec.eq_res_next << ','
        << rec.ineq_violation_next << ',' << rec.range_violation_next << ','
        << rec.full_step_violation << "\n";
  }
}

template <typename Scalar>
void write_human(const SolveReport<Scalar>& report, std::ostream& out) {
  out << "termination      " << to_string(report.reason) << "\n"
      << "objective        " << report.objective << "\n"
      << "iterations       " << report.n_iter << " (split " << report.n_split_iter << ", ratio "
      << report.splitting_ratio << ")\n"
      << "eq residual inf  " << report.feasibility.eq_residual_inf << "\n"
      << "ineq violation   " << report.feasibility.ineq_violation << "\n"
      << "range violation  " << report.feasibility.range_violation << "\n"
      << "wall seconds     " << report.wall_seconds << "\n";
  if (report.kkt_residual_at_stop)
    out << "kkt residual     " << *report.kkt_residual_at_stop << "\n";
}

/// Writes the report in the requested format; empty path means stdout.
template <typename Scalar>
void emit_report(const SolveReport<Scalar>& report, ReportFormat format, std::ostream& out) {
  switch (format) {
    case ReportFormat::Json:
      out << report_to_json(report).dump(2) << "\n";
      break;
    case ReportFormat::Csv:
      write_csv(report, out);
      break;
    default:
      write_human(report, out);
  }
}

template <typename Scalar>
void emit_report(const SolveReport<Scalar>& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SolveError("cannot open output file: " + path);
  out.precision(17);
  emit_report(report, format, out);
  if (!out.good()) throw SolveError("write failed: " + path);
}

}  // namespace splitsqp
