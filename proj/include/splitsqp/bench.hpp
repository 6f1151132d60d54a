#pragma once

#include <cmath>
#include <optional>
#include <type_traits>
#include <vector>

#include "splitsqp/problem.hpp"
#include "splitsqp/qp.hpp"
#include "splitsqp/types.hpp"

namespace splitsqp {

/// Maps block coordinates back to the original variable ordering of the
/// benchmark model (0-based original indices).
struct VariableSplit {
  std::vector<Index> x_to_original;
  std::vector<Index> y_to_original;
};

template <typename Scalar>
struct BuiltProblem {
  TwoBlockProblem<Scalar> problem;
  VariableSplit split;
};

/// Scalable test family generalizing the 15-variable HS118 instance.
/// Variable count 3q; scale (n1, n2; m1, m2; l1, l2) = (2q, q; 0, q; 4q-2, 2q-1).
struct Hs118Family {
  Index q = 5;
};

namespace detail {

// Chain-wise terms of the generalized-HS118 objective: base linear/quadratic
// cost plus cubic and exp-trig terms that switch on for q > 5.
template <typename Scalar>
struct Hs118Terms {
  Scalar lin, quad, cubic;
  bool use_sin;  // e^{sin t} chain vs. e^{cos t} chains

  Scalar value(Scalar t, Scalar on) const {
    const Scalar trig = use_sin ? std::exp(std::sin(t)) : std::exp(std::cos(t));
    return lin * t + quad * t * t + on * (cubic * t * t * t + trig);
  }
  Scalar deriv(Scalar t, Scalar on) const {
    const Scalar trig = use_sin ? std::cos(t) * std::exp(std::sin(t))
                                : -std::sin(t) * std::exp(std::cos(t));
    return lin + 2 * quad * t + on * (3 * cubic * t * t + trig);
  }
  Scalar deriv2(Scalar t, Scalar on) const {
    const Scalar c = std::cos(t), s = std::sin(t);
    const Scalar trig = use_sin ? std::exp(s) * (c * c - s) : std::exp(c) * (s * s - c);
    return 2 * quad + on * (6 * cubic * t + trig);
  }
};

template <typename Scalar>
constexpr Hs118Terms<Scalar> kHs118ChainA{Scalar(2.3), Scalar(0.0001), Scalar(-0.0005), true};
template <typename Scalar>
constexpr Hs118Terms<Scalar> kHs118ChainB{Scalar(1.7), Scalar(0.0001), Scalar(0.0008), false};
template <typename Scalar>
constexpr Hs118Terms<Scalar> kHs118ChainC{Scalar(2.2), Scalar(0.00015), Scalar(0.001), false};

}  // namespace detail

/// Group-sum right-hand sides: 60, 50, 70, 85, 100, then 110, 115, ...
/// for groups past the fifth (0-based group index).
template <typename Scalar>
Scalar hs118_group_rhs(Index group) {
  constexpr double first[5] = {60, 50, 70, 85, 100};
  if (group < 5) return Scalar(first[group]);
  return Scalar(100) + Scalar(5) * Scalar(group - 3);
}

template <typename Scalar>
BuiltProblem<Scalar> build_hs118(Index q) {
  if (q < 5) throw std::invalid_argument("hs118 family needs q >= 5");
  const Scalar on = q > 5 ? Scalar(1) : Scalar(0);

  BuiltProblem<Scalar> built;
  TwoBlockProblem<Scalar>& p = built.problem;
  p.n1 = 2 * q;
  p.n2 = q;

  const auto ta = detail::kHs118ChainA<Scalar>;
  const auto tb = detail::kHs118ChainB<Scalar>;
  const auto tc = detail::kHs118ChainC<Scalar>;

  p.f_eval = [q, on, ta, tb](const VectorX<Scalar>& x) {
    Scalar sum = 0;
    for (Index j = 0; j < q; ++j) sum += ta.value(x[j], on) + tb.value(x[q + j], on);
    return sum;
  };
  p.f_grad = [q, on, ta, tb](const VectorX<Scalar>& x) {
    VectorX<Scalar> g(2 * q);
    for (Index j = 0; j < q; ++j) {
      g[j] = ta.deriv(x[j], on);
      g[q + j] = tb.deriv(x[q + j], on);
    }
    return g;
  };
  p.f_hess = [q, on, ta, tb](const VectorX<Scalar>& x) {
    MatrixX<Scalar> H = MatrixX<Scalar>::Zero(2 * q, 2 * q);
    for (Index j = 0; j < q; ++j) {
      H(j, j) = ta.deriv2(x[j], on);
      H(q + j, q + j) = tb.deriv2(x[q + j], on);
    }
    return H;
  };
  p.theta_eval = [q, on, tc](const VectorX<Scalar>& y) {
    Scalar sum = 0;
    for (Index j = 0; j < q; ++j) sum += tc.value(y[j], on);
    return sum;
  };
  p.theta_grad = [q, on, tc](const VectorX<Scalar>& y) {
    VectorX<Scalar> g(q);
    for (Index j = 0; j < q; ++j) g[j] = tc.deriv(y[j], on);
    return g;
  };
  p.theta_hess = [q, on, tc](const VectorX<Scalar>& y) {
    MatrixX<Scalar> H = MatrixX<Scalar>::Zero(q, q);
    for (Index j = 0; j < q; ++j) H(j, j) = tc.deriv2(y[j], on);
    return H;
  };

  // No equality block.
  p.A.resize(0, p.n1);
  p.B.resize(0, p.n2);
  p.b.resize(0);

  // Group sums x_{3i+1} + x_{3i+2} + x_{3i+3} >= rhs_i, stored negated.
  p.E = MatrixX<Scalar>::Zero(q, 2 * q);
  p.F = MatrixX<Scalar>::Zero(q, q);
  p.d.resize(q);
  for (Index i = 0; i < q; ++i) {
    p.E(i, i) = -1;
    p.E(i, q + i) = -1;
    p.F(i, i) = -1;
    p.d[i] = -hs118_group_rhs<Scalar>(i);
  }

  // x-block ranges: the two in-block difference chains, then the boxes.
  const Index l1 = 4 * q - 2;
  p.C = MatrixX<Scalar>::Zero(l1, 2 * q);
  p.l.resize(l1);
  p.v.resize(l1);
  for (Index j = 0; j + 1 < q; ++j) {
    p.C(j, j + 1) = 1;
    p.C(j, j) = -1;
    p.l[j] = -7;
    p.v[j] = 6;
    const Index row = (q - 1) + j;
    p.C(row, q + j + 1) = 1;
    p.C(row, q + j) = -1;
    p.l[row] = -7;
    p.v[row] = 7;
  }
  auto chain_a_bounds = [](Index j) -> std::pair<double, double> {
    if (j == 0) return {8, 21};
    if (j <= 4) return {0, 90};
    return {0, 90 + 3 * static_cast<double>(j + 1)};
  };
  auto chain_b_bounds = [](Index j) -> std::pair<double, double> {
    if (j == 0) return {43, 57};
    if (j <= 4) return {0, 120};
    return {0, 120 + 6 * static_cast<double>(j + 1)};
  };
  auto chain_c_bounds = [](Index j) -> std::pair<double, double> {
    if (j == 0) return {3, 16};
    if (j <= 4) return {0, 60};
    return {0, 60 + static_cast<double>(j + 1)};
  };
  for (Index t = 0; t < 2 * q; ++t) {
    const Index row = 2 * (q - 1) + t;
    p.C(row, t) = 1;
    const auto bounds = t < q ? chain_a_bounds(t) : chain_b_bounds(t - q);
    p.l[row] = Scalar(bounds.first);
    p.v[row] = Scalar(bounds.second);
  }

  // y-block ranges: difference chain plus boxes.
  const Index l2 = 2 * q - 1;
  p.D = MatrixX<Scalar>::Zero(l2, q);
  p.s.resize(l2);
  p.r.resize(l2);
  for (Index j = 0; j + 1 < q; ++j) {
    p.D(j, j + 1) = 1;
    p.D(j, j) = -1;
    p.s[j] = -7;
    p.r[j] = 6;
  }
  for (Index t = 0; t < q; ++t) {
    const Index row = (q - 1) + t;
    p.D(row, t) = 1;
    const auto bounds = chain_c_bounds(t);
    p.s[row] = Scalar(bounds.first);
    p.r[row] = Scalar(bounds.second);
  }

  built.split.x_to_original.resize(static_cast<size_t>(2 * q));
  built.split.y_to_original.resize(static_cast<size_t>(q));
  for (Index j = 0; j < q; ++j) {
    built.split.x_to_original[static_cast<size_t>(j)] = 3 * j;
    built.split.x_to_original[static_cast<size_t>(q + j)] = 3 * j + 1;
    built.split.y_to_original[static_cast<size_t>(j)] = 3 * j + 2;
  }
  return built;
}

template <typename Scalar>
BuiltProblem<Scalar> build_hs118(const Hs118Family& family) {
  return build_hs118<Scalar>(family.q);
}

/// The known optimum of the q = 5 instance in original variable order.
template <typename Scalar>
VectorX<Scalar> hs118_known_optimum() {
  VectorX<Scalar> x(15);
  x << 8, 49, 3, 1, 56, 0, 1, 63, 6, 3, 70, 12, 5, 77, 18;
  return x;
}

template <typename Scalar>
Point<Scalar> to_blocks(const VectorX<Scalar>& original, const VariableSplit& split) {
  Point<Scalar> u;
  u.x.resize(static_cast<Index>(split.x_to_original.size()));
  u.y.resize(static_cast<Index>(split.y_to_original.size()));
  for (size_t j = 0; j < split.x_to_original.size(); ++j)
    u.x[static_cast<Index>(j)] = original[split.x_to_original[j]];
  for (size_t j = 0; j < split.y_to_original.size(); ++j)
    u.y[static_cast<Index>(j)] = original[split.y_to_original[j]];
  return u;
}

template <typename Scalar>
VectorX<Scalar> from_blocks(const Point<Scalar>& u, const VariableSplit& split) {
  VectorX<Scalar> original(u.size());
  for (size_t j = 0; j < split.x_to_original.size(); ++j)
    original[split.x_to_original[j]] = u.x[static_cast<Index>(j)];
  for (size_t j = 0; j < split.y_to_original.size(); ++j)
    original[split.y_to_original[j]] = u.y[static_cast<Index>(j)];
  return original;
}

/// One generating unit of the dispatch model.
template <typename Scalar>
struct EpdUnit {
  Scalar a = 0, b = 0, c = 0, d = 0;  // cubic/quadratic/linear/constant cost
  Scalar e = 0, f = 0;                // valve-point ripple amplitude and frequency
  Scalar p_min = 0, p_max = 0;
  Scalar ramp_down = 0, ramp_up = 0;
};

/// Multi-period dispatch family: N units over T periods, power balance per
/// period, per-unit ramp and capacity limits, optional valve-point ripple.
template <typename Scalar>
struct EpdFamily {
  std::vector<EpdUnit<Scalar>> units;
  VectorX<Scalar> load;  // length T
  bool valve_point = false;
  int delta = 2;  // ripple exponent; 1 is evaluation-only (nonsmooth)

  Index n_units() const { return static_cast<Index>(units.size()); }
  Index n_periods() const { return load.size(); }
};

namespace detail {

template <typename Scalar>
Scalar epd_cost(const EpdUnit<Scalar>& u, Scalar P, bool valve, int delta) {
  Scalar value = ((u.a * P + u.b) * P + u.c) * P + u.d;
  if (valve && u.e != Scalar(0)) {
    const Scalar w = std::sin(u.f * (P - u.p_min));
    value += delta == 2 ? u.e * w * w : u.e * std::abs(w);
  }
  return value;
}

template <typename Scalar>
Scalar epd_cost_deriv(const EpdUnit<Scalar>& u, Scalar P, bool valve, int delta) {
  Scalar g = (3 * u.a * P + 2 * u.b) * P + u.c;
  if (valve && u.e != Scalar(0)) {
    const Scalar w = u.f * (P - u.p_min);
    if (delta == 2) {
      g += u.e * u.f * std::sin(2 * w);
    } else {
      const Scalar sw = std::sin(w);
      const Scalar sgn = sw > 0 ? Scalar(1) : (sw < 0 ? Scalar(-1) : Scalar(0));
      g += u.e * u.f * std::cos(w) * sgn;
    }
  }
  return g;
}

template <typename Scalar>
Scalar epd_cost_deriv2(const EpdUnit<Scalar>& u, Scalar P, bool valve, int delta) {
  if (delta != 2 && valve && u.e != Scalar(0))
    throw NonsmoothError("dispatch cost with ripple exponent 1 has no Hessian");
  Scalar h = 6 * u.a * P + 2 * u.b;
  if (valve && u.e != Scalar(0)) h += 2 * u.e * u.f * u.f * std::cos(2 * u.f * (P - u.p_min));
  return h;
}

}  // namespace detail

template <typename Scalar>
BuiltProblem<Scalar> build_epd(const EpdFamily<Scalar>& family) {
  const Index N = family.n_units();
  const Index T = family.n_periods();
  if (N < 2) throw std::invalid_argument("dispatch family needs at least two units");
  if (T < 1) throw std::invalid_argument("dispatch family needs at least one period");
  if (family.delta != 1 && family.delta != 2)
    throw std::invalid_argument("ripple exponent must be 1 or 2");
  for (Index i = 0; i < N; ++i) {
    const auto& u = family.units[static_cast<size_t>(i)];
    if (!(u.p_min < u.p_max)) throw std::invalid_argument("unit needs p_min < p_max");
    if (u.ramp_down <= 0 || u.ramp_up <= 0)
      throw std::invalid_argument("unit needs positive ramp limits");
  }
  Scalar total_min = 0, total_max = 0;
  for (const auto& u : family.units) {
    total_min += u.p_min;
    total_max += u.p_max;
  }
  for (Index t = 0; t < T; ++t)
    if (family.load[t] < total_min || family.load[t] > total_max)
      throw std::invalid_argument("load at period " + std::to_string(t + 1) +
                                  " is outside total capacity");

  const Index N1 = N / 2;
  const Index N2 = N - N1;

  BuiltProblem<Scalar> built;
  TwoBlockProblem<Scalar>& p = built.problem;
  p.n1 = N1 * T;
  p.n2 = N2 * T;

  auto make_objective = [&family, T](Index unit_begin, Index unit_count) {
    std::vector<EpdUnit<Scalar>> units(
        family.units.begin() + static_cast<long>(unit_begin),
        family.units.begin() + static_cast<long>(unit_begin + unit_count));
    const bool valve = family.valve_point;
    const int delta = family.delta;
    struct Callbacks {
      typename TwoBlockProblem<Scalar>::ValueFn value;
      typename TwoBlockProblem<Scalar>::GradFn grad;
      typename TwoBlockProblem<Scalar>::HessFn hess;
    } cb;
    cb.value = [units, valve, delta, T](const VectorX<Scalar>& z) {
      Scalar sum = 0;
      for (Index i = 0; i < static_cast<Index>(units.size()); ++i)
        for (Index t = 0; t < T; ++t)
          sum += detail::epd_cost(units[static_cast<size_t>(i)], z[i * T + t], valve, delta);
      return sum;
    };
    cb.grad = [units, valve, delta, T](const VectorX<Scalar>& z) {
      VectorX<Scalar> g(z.size());
      for (Index i = 0; i < static_cast<Index>(units.size()); ++i)
        for (Index t = 0; t < T; ++t)
          g[i * T + t] =
              detail::epd_cost_deriv(units[static_cast<size_t>(i)], z[i * T + t], valve, delta);
      return g;
    };
    cb.hess = [units, valve, delta, T](const VectorX<Scalar>& z) {
      MatrixX<Scalar> H = MatrixX<Scalar>::Zero(z.size(), z.size());
      for (Index i = 0; i < static_cast<Index>(units.size()); ++i)
        for (Index t = 0; t < T; ++t)
          H(i * T + t, i * T + t) =
              detail::epd_cost_deriv2(units[static_cast<size_t>(i)], z[i * T + t], valve, delta);
      return H;
    };
    return cb;
  };

  auto cb_x = make_objective(0, N1);
  p.f_eval = cb_x.value;
  p.f_grad = cb_x.grad;
  p.f_hess = cb_x.hess;
  auto cb_y = make_objective(N1, N2);
  p.theta_eval = cb_y.value;
  p.theta_grad = cb_y.grad;
  p.theta_hess = cb_y.hess;

  // Power balance: one equality row per period.
  p.A = MatrixX<Scalar>::Zero(T, p.n1);
  p.B = MatrixX<Scalar>::Zero(T, p.n2);
  for (Index t = 0; t < T; ++t) {
    for (Index i = 0; i < N1; ++i) p.A(t, i * T + t) = 1;
    for (Index i = 0; i < N2; ++i) p.B(t, i * T + t) = 1;
  }
  p.b = family.load;

  // No joint inequality block.
  p.E.resize(0, p.n1);
  p.F.resize(0, p.n2);
  p.d.resize(0);

  // Per block: capacity boxes (N T rows) followed by ramp rows (N T rows);
  // the first-period ramp anchors at P_{i,0} = 0.5 P_max.
  auto fill_ranges = [&family, T](Index unit_begin, Index unit_count, MatrixX<Scalar>& M,
                                  VectorX<Scalar>& lower, VectorX<Scalar>& upper) {
    const Index n = unit_count * T;
    M = MatrixX<Scalar>::Zero(2 * n, n);
    lower.resize(2 * n);
    upper.resize(2 * n);
    for (Index i = 0; i < unit_count; ++i) {
      const auto& u = family.units[static_cast<size_t>(unit_begin + i)];
      for (Index t = 0; t < T; ++t) {
        const Index var = i * T + t;
        M(var, var) = 1;
        lower[var] = u.p_min;
        upper[var] = u.p_max;
        const Index row = n + var;
        if (t == 0) {
          M(row, var) = 1;
          lower[row] = Scalar(0.5) * u.p_max - u.ramp_down;
          upper[row] = Scalar(0.5) * u.p_max + u.ramp_up;
        } else {
          M(row, var) = 1;
          M(row, var - 1) = -1;
          lower[row] = -u.ramp_down;
          upper[row] = u.ramp_up;
        }
      }
    }
  };
  fill_ranges(0, N1, p.C, p.l, p.v);
  fill_ranges(N1, N2, p.D, p.s, p.r);

  built.split.x_to_original.resize(static_cast<size_t>(p.n1));
  built.split.y_to_original.resize(static_cast<size_t>(p.n2));
  for (Index i = 0; i < N1; ++i)
    for (Index t = 0; t < T; ++t)
      built.split.x_to_original[static_cast<size_t>(i * T + t)] = i * T + t;
  for (Index i = 0; i < N2; ++i)
    for (Index t = 0; t < T; ++t)
      built.split.y_to_original[static_cast<size_t>(i * T + t)] = (N1 + i) * T + t;
  return built;
}

/// Dispatch start: every unit pinned at its minimum output for all periods.
template <typename Scalar>
Point<Scalar> epd_initial_point(const EpdFamily<Scalar>& family) {
  const Index N = family.n_units();
  const Index T = family.n_periods();
  const Index N1 = N / 2;
  Point<Scalar> u;
  u.x.resize(N1 * T);
  u.y.resize((N - N1) * T);
  for (Index i = 0; i < N1; ++i)
    u.x.segment(i * T, T).setConstant(family.units[static_cast<size_t>(i)].p_min);
  for (Index i = N1; i < N; ++i)
    u.y.segment((i - N1) * T, T).setConstant(family.units[static_cast<size_t>(i)].p_min);
  return u;
}

template <typename Scalar>
VectorX<Scalar> epd_initial_multiplier(const EpdFamily<Scalar>& family) {
  return VectorX<Scalar>::Ones(family.n_periods());
}

namespace detail {

// Per-variable interval implied by single-entry range rows; used to pick
// the reference point of the feasible-start problem.
template <typename Scalar>
void tighten_box(const MatrixX<Scalar>& M, const VectorX<Scalar>& lower,
                 const VectorX<Scalar>& upper, VectorX<Scalar>& box_lo, VectorX<Scalar>& box_hi) {
  for (Index row = 0; row < M.rows(); ++row) {
    Index nz = -1;
    bool single = true;
    for (Index col = 0; col < M.cols(); ++col) {
      if (M(row, col) == Scalar(0)) continue;
      if (nz >= 0) {
        single = false;
        break;
      }
      nz = col;
    }
    if (!single || nz < 0) continue;
    const Scalar w = M(row, nz);
    Scalar lo_var = lower[row] / w;
    Scalar hi_var = upper[row] / w;
    if (w < 0) std::swap(lo_var, hi_var);
    box_lo[nz] = std::max(box_lo[nz], lo_var);
    box_hi[nz] = std::min(box_hi[nz], hi_var);
  }
}

}  // namespace detail

/// A partially feasible point, found by projecting a reference point (the
/// midpoint of the per-variable boxes where finite, zero elsewhere) onto
/// F_+ with the QP engine. Throws InfeasibleError when F_+ is empty.
template <typename Scalar>
Point<Scalar> find_feasible_start(const TwoBlockProblem<Scalar>& p) {
  const Index n = p.n1 + p.n2;
  VectorX<Scalar> box_lo = VectorX<Scalar>::Constant(n, -kInf<Scalar>);
  VectorX<Scalar> box_hi = VectorX<Scalar>::Constant(n, kInf<Scalar>);
  {
    VectorX<Scalar> lo_x = box_lo.head(p.n1), hi_x = box_hi.head(p.n1);
    detail::tighten_box(p.C, p.l, p.v, lo_x, hi_x);
    box_lo.head(p.n1) = lo_x;
    box_hi.head(p.n1) = hi_x;
    VectorX<Scalar> lo_y = box_lo.tail(p.n2), hi_y = box_hi.tail(p.n2);
    detail::tighten_box(p.D, p.s, p.r, lo_y, hi_y);
    box_lo.tail(p.n2) = lo_y;
    box_hi.tail(p.n2) = hi_y;
  }
  VectorX<Scalar> reference = VectorX<Scalar>::Zero(n);
  for (Index j = 0; j < n; ++j)
    if (std::isfinite(box_lo[j]) && std::isfinite(box_hi[j]))
      reference[j] = (box_lo[j] + box_hi[j]) / 2;

  QpProblem<Scalar> qp;
  qp.H = MatrixX<Scalar>::Identity(n, n);
  qp.g = -reference;
  if (p.m2() > 0) {
    qp.G.resize(p.m2(), n);
    qp.G.leftCols(p.n1) = p.E;
    qp.G.rightCols(p.n2) = p.F;
    qp.h = p.d;
  } else {
    qp.G.resize(0, n);
    qp.h.resize(0);
  }
  qp.R = MatrixX<Scalar>::Zero(p.l1() + p.l2(), n);
  qp.R.topLeftCorner(p.l1(), p.n1) = p.C;
  qp.R.bottomRightCorner(p.l2(), p.n2) = p.D;
  qp.lo.resize(p.l1() + p.l2());
  qp.hi.resize(p.l1() + p.l2());
  qp.lo.head(p.l1()) = p.l;
  qp.lo.tail(p.l2()) = p.s;
  qp.hi.head(p.l1()) = p.v;
  qp.hi.tail(p.l2()) = p.r;

  const QpSolution<Scalar> sol = solve_qp(qp);
  Point<Scalar> u;
  u.x = sol.z.head(p.n1);
  u.y = sol.z.tail(p.n2);
  return u;
}

/// Family overload honoring the dispatch convention of starting at P_min.
template <typename Scalar>
Point<Scalar> find_feasible_start(const TwoBlockProblem<Scalar>&, const EpdFamily<Scalar>& family) {
  return epd_initial_point(family);
}

/// Builds a larger instance by copying base units per `counts` (one count
/// per base unit). The load is scaled by the replicated/base capacity ratio
/// unless an explicit factor is given.
template <typename Scalar>
EpdFamily<Scalar> replicate_units(const EpdFamily<Scalar>& base, const std::vector<int>& counts,
                                  std::optional<std::type_identity_t<Scalar>> load_scale =
                                      std::nullopt) {
  if (counts.size() != base.units.size())
    throw std::invalid_argument("replication needs one count per base unit");
  EpdFamily<Scalar> out;
  out.valve_point = base.valve_point;
  out.delta = base.delta;
  Scalar base_capacity = 0, new_capacity = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw std::invalid_argument("replication counts must be nonnegative");
    base_capacity += base.units[i].p_max;
    new_capacity += Scalar(counts[i]) * base.units[i].p_max;
    for (int k = 0; k < counts[i]; ++k) out.units.push_back(base.units[i]);
  }
  if (out.units.empty()) throw std::invalid_argument("replication produced no units");
  const Scalar factor = load_scale ? *load_scale : new_capacity / base_capacity;
  out.load = factor * base.load;
  return out;
}

}  // namespace splitsqp
