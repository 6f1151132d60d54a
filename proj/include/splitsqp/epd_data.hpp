#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "splitsqp/bench.hpp"
#include "splitsqp/types.hpp"

namespace splitsqp {

/// Delimited-text unit file. Grammar (whitespace-separated tokens, '#'
/// starts a comment):
///
///   unit <a> <b> <c> <d> <e> <f> <pmin> <pmax> <ramp_down> <ramp_up>
///   load <value>...        (one or more lines; values are appended)
///
/// Errors carry the 1-based line number and the offending field name.
template <typename Scalar>
EpdFamily<Scalar> parse_epd_units(std::istream& in) {
  EpdFamily<Scalar> family;
  std::vector<Scalar> load;
  std::vector<int> unit_lines;

  static const char* kUnitFields[10] = {"a",    "b",    "c",    "d",         "e",
                                        "f",    "pmin", "pmax", "ramp_down", "ramp_up"};

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string keyword;
    if (!(tokens >> keyword)) continue;

    auto parse_number = [&](const std::string& field) {
      std::string token;
      if (!(tokens >> token))
        throw DataFileError(line_number, field, "missing value");
      try {
        size_t used = 0;
        const double value = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        if (!std::isfinite(value))
          throw DataFileError(line_number, field, "value must be finite");
        return Scalar(value);
      } catch (const DataFileError&) {
        throw;
      } catch (const std::exception&) {
        throw DataFileError(line_number, field, "not a number: '" + token + "'");
      }
    };

    if (keyword == "unit") {
      EpdUnit<Scalar> unit;
      Scalar* fields[10] = {&unit.a,     &unit.b,     &unit.c,         &unit.d,      &unit.e,
                            &unit.f,     &unit.p_min, &unit.p_max,     &unit.ramp_down,
                            &unit.ramp_up};
      for (int k = 0; k < 10; ++k) *fields[k] = parse_number(kUnitFields[k]);
      std::string extra;
      if (tokens >> extra)
        throw DataFileError(line_number, "unit", "unexpected trailing token '" + extra + "'");
      if (!(unit.p_min < unit.p_max))
        throw DataFileError(line_number, "pmax", "requires pmin < pmax");
      if (unit.p_min < Scalar(0))
        throw DataFileError(line_number, "pmin", "must be nonnegative");
      if (unit.ramp_down <= Scalar(0))
        throw DataFileError(line_number, "ramp_down", "must be positive");
      if (unit.ramp_up <= Scalar(0))
        throw DataFileError(line_number, "ramp_up", "must be positive");
      family.units.push_back(unit);
      unit_lines.push_back(line_number);
    } else if (keyword == "load") {
      size_t before = load.size();
      std::string token;
      while (tokens >> token) {
        try {
          size_t used = 0;
          const double value = std::stod(token, &used);
          if (used != token.size()) throw std::invalid_argument(token);
          load.push_back(Scalar(value));
        } catch (const std::exception&) {
          throw DataFileError(line_number, "load", "not a number: '" + token + "'");
        }
        if (load.back() <= Scalar(0))
          throw DataFileError(line_number, "load", "load values must be positive");
      }
      if (load.size() == before)
        throw DataFileError(line_number, "load", "missing values");
    } else {
      throw DataFileError(line_number, keyword, "unknown record type");
    }
  }

  if (family.units.empty()) throw DataFileError(line_number, "unit", "no unit records found");
  if (load.empty()) throw DataFileError(line_number, "load", "no load profile found");
  family.load = Eigen::Map<const VectorX<Scalar>>(load.data(), static_cast<Index>(load.size()));
  return family;
}

template <typename Scalar>
EpdFamily<Scalar> load_epd_units(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SolveError("cannot open unit file: " + path);
  return parse_epd_units<Scalar>(in);
}

/// Cuts the load profile to the first T periods.
template <typename Scalar>
void truncate_horizon(EpdFamily<Scalar>& family, Index periods) {
  if (periods < 1 || periods > family.load.size())
    throw std::invalid_argument("requested horizon exceeds the load profile length");
  family.load.conservativeResize(periods);
}

}  // namespace splitsqp
