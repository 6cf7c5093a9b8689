#ifndef RUC_COMPACT_FORM_HPP
#define RUC_COMPACT_FORM_HPP

// The recourse constraints compiled once per case into <=/= rows over the
// recourse columns (generation, curtailment, load shedding). Right-hand sides
// stay affine in the commitment u and in the realized wind w, so the same rows
// serve the master's scenario copies (u, alpha variable; slacks dropped) and
// the dual subproblem (u, alpha fixed; w driven by the adversary).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ruc/system_model.hpp"

namespace ruc {

struct RecourseColumn {
  enum class Kind { Generation, Curtailment, LoadShed };
  Kind kind = Kind::Generation;
  int device = 0;
  int period = 0;
  double cost = 0.0;
};

struct CompactRow {
  std::string name;
  bool equality = false;
  std::vector<std::pair<int, double>> terms;       ///< recourse column -> coefficient
  double rhs = 0.0;                                ///< constant part of the right-hand side
  std::vector<std::pair<int, double>> commitment;  ///< g*T+t -> coefficient of u_gt on the rhs
  std::vector<std::pair<int, double>> wind;        ///< m*T+t -> coefficient of w_mt on the rhs
  bool slack_only = false;                         ///< a bound on a slack column only
  bool redundant = false;  ///< cannot bind for any commitment, wind or recourse point
};

struct CompactForm {
  int generators = 0;
  int farms = 0;
  int loads = 0;
  int periods = 0;
  std::vector<RecourseColumn> columns;
  std::vector<CompactRow> rows;

  [[nodiscard]] int generation(int g, int t) const { return g * periods + t; }
  [[nodiscard]] int curtailment(int m, int t) const { return (generators + m) * periods + t; }
  [[nodiscard]] int shed(int j, int t) const { return (generators + farms + j) * periods + t; }

  [[nodiscard]] double rhs_at(const CompactRow& r, const std::vector<std::uint8_t>& u,
                              const std::vector<double>& w) const {
    double b = r.rhs;
    for (const auto& [i, c] : r.commitment) b += c * u[static_cast<std::size_t>(i)];
    for (const auto& [i, c] : r.wind) b += c * w[static_cast<std::size_t>(i)];
    return b;
  }
};

namespace detail {

inline void push_term(std::vector<std::pair<int, double>>& terms, int col, double coef) {
  if (std::abs(coef) < 1e-12) return;
  for (auto& [c, v] : terms) {
    if (c == col) {
      v += coef;
      return;
    }
  }
  terms.emplace_back(col, coef);
}

}  // namespace detail

/// Flags the rows whose left side, maximized over the column ranges (generation
/// in [0, P_max], curtailment in [0, capacity], shedding in [0, D]), stays below the
/// smallest right side over u in {0,1} and w in [0, capacity]. Dropping them
/// changes neither the master nor the recourse optimum.
inline void mark_redundant_rows(const SystemCase& c, CompactForm& f) {
  const int T = f.periods;
  auto upper = [&](int col) {
    const auto& k = f.columns[static_cast<std::size_t>(col)];
    switch (k.kind) {
      case RecourseColumn::Kind::Generation: return c.generators[static_cast<std::size_t>(k.device)].p_max;
      case RecourseColumn::Kind::Curtailment: return c.wind_farms[static_cast<std::size_t>(k.device)].capacity;
      case RecourseColumn::Kind::LoadShed:
        return c.loads[static_cast<std::size_t>(k.device)].demand[static_cast<std::size_t>(k.period)];
    }
    return 0.0;
  };
  for (auto& row : f.rows) {
    if (row.equality || row.slack_only) continue;
    double lhs = 0.0;
    for (const auto& [col, coef] : row.terms) lhs += std::max(0.0, coef * upper(col));
    double rhs = row.rhs;
    for (const auto& [i, coef] : row.commitment) rhs += std::min(0.0, coef);
    for (const auto& [i, coef] : row.wind) {
      rhs += std::min(0.0, coef * c.wind_farms[static_cast<std::size_t>(i / T)].capacity);
    }
    row.redundant = lhs <= rhs - 1e-9 * std::max(1.0, std::abs(rhs));
  }
}

/// Compiles capacity, ramping, balance, line-flow and slack-bound rows.
/// Requires `c.network.ptdf` to be populated.
inline CompactForm compile_recourse(const SystemCase& c) {
  CompactForm f;
  f.generators = c.num_generators();
  f.farms = c.num_farms();
  f.loads = c.num_loads();
  f.periods = c.horizon;
  const int T = c.horizon;
  using Kind = RecourseColumn::Kind;
  for (int g = 0; g < f.generators; ++g)
    for (int t = 0; t < T; ++t) f.columns.push_back({Kind::Generation, g, t, 0.0});
  for (int m = 0; m < f.farms; ++m)
    for (int t = 0; t < T; ++t) f.columns.push_back({Kind::Curtailment, m, t, 1.0});
  for (int j = 0; j < f.loads; ++j)
    for (int t = 0; t < T; ++t) f.columns.push_back({Kind::LoadShed, j, t, 1.0});

  auto tag = [](const std::string& id, int t) { return "[" + id + "," + std::to_string(t + 1) + "]"; };

  for (int g = 0; g < f.generators; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    const double rd = gen.ramp_down;
    const double ru = gen.ramp_up;
    const double pmax = gen.p_max;
    for (int t = 0; t < T; ++t) {
      const int p = f.generation(g, t);
      const int ut = g * T + t;
      // p <= u pmax ; -p <= -u pmin
      f.rows.push_back({"pmax" + tag(gen.id, t), false, {{p, 1.0}}, 0.0, {{ut, pmax}}, {}, false});
      f.rows.push_back({"pmin" + tag(gen.id, t), false, {{p, -1.0}}, 0.0, {{ut, -gen.p_min}}, {}, false});
      // p_{t-1} - p_t <= u_t R- + (1 - u_t) Pmax
      // p_t - p_{t-1} <= u_{t-1} R+ + (1 - u_{t-1}) Pmax
      if (t == 0) {
        const double p0 = gen.initial.p0;
        f.rows.push_back({"rdn" + tag(gen.id, t), false, {{p, -1.0}}, pmax - p0, {{ut, rd - pmax}}, {}, false});
        const double up_room = gen.initial.on ? ru : pmax;
        f.rows.push_back({"rup" + tag(gen.id, t), false, {{p, 1.0}}, p0 + up_room, {}, {}, false});
      } else {
        const int prev = f.generation(g, t - 1);
        f.rows.push_back({"rdn" + tag(gen.id, t), false, {{prev, 1.0}, {p, -1.0}}, pmax, {{ut, rd - pmax}}, {}, false});
        f.rows.push_back({"rup" + tag(gen.id, t), false, {{p, 1.0}, {prev, -1.0}}, pmax, {{ut - 1, ru - pmax}}, {}, false});
      }
    }
  }

  const auto& net = c.network;
  for (int t = 0; t < T; ++t) {
    const std::string ts = "[" + std::to_string(t + 1) + "]";
    CompactRow bal{"bal" + ts, true, {}, c.total_demand(t), {}, {}, false};
    for (int g = 0; g < f.generators; ++g) bal.terms.emplace_back(f.generation(g, t), 1.0);
    for (int m = 0; m < f.farms; ++m) {
      bal.terms.emplace_back(f.curtailment(m, t), -1.0);
      bal.wind.emplace_back(m * T + t, -1.0);
    }
    for (int j = 0; j < f.loads; ++j) bal.terms.emplace_back(f.shed(j, t), 1.0);
    f.rows.push_back(std::move(bal));

    for (int l = 0; l < c.num_lines(); ++l) {
      const auto& line = net.lines[static_cast<std::size_t>(l)];
      const auto li = static_cast<std::size_t>(l);
      std::vector<std::pair<int, double>> terms;
      std::vector<std::pair<int, double>> wind;
      double load_flow = 0.0;
      for (int g = 0; g < f.generators; ++g) {
        detail::push_term(terms, f.generation(g, t),
                          net.shift_factor(li, c.generators[static_cast<std::size_t>(g)].bus));
      }
      for (int m = 0; m < f.farms; ++m) {
        const double pi = net.shift_factor(li, c.wind_farms[static_cast<std::size_t>(m)].bus);
        detail::push_term(terms, f.curtailment(m, t), -pi);
        if (std::abs(pi) >= 1e-12) wind.emplace_back(m * T + t, pi);
      }
      for (int j = 0; j < f.loads; ++j) {
        const auto& load = c.loads[static_cast<std::size_t>(j)];
        const double pi = net.shift_factor(li, load.bus);
        detail::push_term(terms, f.shed(j, t), pi);
        load_flow += pi * load.demand[static_cast<std::size_t>(t)];
      }
      const std::string lt = "[" + line.id + "," + std::to_string(t + 1) + "]";
      // flow = sum pi_g p + sum pi_m (w - dw) - sum pi_j (D - dD), within +/- F
      CompactRow hi{"flow_hi" + lt, false, terms, line.capacity + load_flow, {}, {}, false};
      for (const auto& [i, pi] : wind) hi.wind.emplace_back(i, -pi);
      CompactRow lo{"flow_lo" + lt, false, {}, line.capacity - load_flow, {}, wind, false};
      for (const auto& [col, v] : terms) lo.terms.emplace_back(col, -v);
      f.rows.push_back(std::move(hi));
      f.rows.push_back(std::move(lo));
    }
  }

  for (int j = 0; j < f.loads; ++j) {
    const auto& load = c.loads[static_cast<std::size_t>(j)];
    for (int t = 0; t < T; ++t) {
      f.rows.push_back({"shed_max" + tag(load.id, t), false, {{f.shed(j, t), 1.0}},
                        load.demand[static_cast<std::size_t>(t)], {}, {}, true});
    }
  }
  for (int m = 0; m < f.farms; ++m) {
    const auto& farm = c.wind_farms[static_cast<std::size_t>(m)];
    for (int t = 0; t < T; ++t) {
      f.rows.push_back({"curt_max" + tag(farm.id, t), false, {{f.curtailment(m, t), 1.0}}, 0.0, {},
                        {{m * T + t, 1.0}}, true});
    }
  }
  mark_redundant_rows(c, f);
  return f;
}

}  // namespace ruc

#endif  // RUC_COMPACT_FORM_HPP
