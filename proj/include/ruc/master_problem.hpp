#ifndef RUC_MASTER_PROBLEM_HPP
#define RUC_MASTER_PROBLEM_HPP

// First-stage unit commitment with the wind commitment ratio alpha, plus one
// slack-free recourse copy per recorded worst-case realization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ruc/compact_form.hpp"
#include "ruc/errors.hpp"
#include "ruc/milp/model.hpp"
#include "ruc/milp/solve.hpp"
#include "ruc/system_model.hpp"

namespace ruc {

enum class Mode {
  Wgc,          ///< alpha is a first-stage decision in [0, 1]
  Traditional,  ///< alpha fixed to 1: all forecast wind is committed
};

inline std::string_view to_string(Mode m) { return m == Mode::Wgc ? "wgc" : "traditional"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "wgc") return Mode::Wgc;
  if (s == "traditional") return Mode::Traditional;
  throw InputError("unknown mode '" + std::string(s) + "' (expected wgc or traditional)");
}

/// Adversary's choice of band edges, farm-major (m*T + t).
struct UncertaintyRealization {
  int farms = 0;
  int periods = 0;
  std::vector<std::uint8_t> up;
  std::vector<std::uint8_t> down;

  static UncertaintyRealization zeros(int farms, int periods) {
    const auto n = static_cast<std::size_t>(farms * periods);
    return {farms, periods, std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0)};
  }

  [[nodiscard]] std::size_t index(int m, int t) const { return static_cast<std::size_t>(m * periods + t); }
  [[nodiscard]] bool up_at(int m, int t) const { return up[index(m, t)] != 0; }
  [[nodiscard]] bool down_at(int m, int t) const { return down[index(m, t)] != 0; }

  [[nodiscard]] bool is_zero() const {
    return std::none_of(up.begin(), up.end(), [](auto x) { return x != 0; }) &&
           std::none_of(down.begin(), down.end(), [](auto x) { return x != 0; });
  }

  [[nodiscard]] int deviations() const {
    int n = 0;
    for (std::size_t i = 0; i < up.size(); ++i) n += up[i] + down[i];
    return n;
  }

  /// Checks v^u + v^l <= 1 and both cardinality budgets.
  [[nodiscard]] bool satisfies_budgets(int gamma_t, int gamma_s) const {
    for (std::size_t i = 0; i < up.size(); ++i) {
      if (up[i] > 1 || down[i] > 1 || up[i] + down[i] > 1) return false;
    }
    for (int m = 0; m < farms; ++m) {
      int n = 0;
      for (int t = 0; t < periods; ++t) n += up_at(m, t) + down_at(m, t);
      if (n > gamma_t) return false;
    }
    for (int t = 0; t < periods; ++t) {
      int n = 0;
      for (int m = 0; m < farms; ++m) n += up_at(m, t) + down_at(m, t);
      if (n > gamma_s) return false;
    }
    return true;
  }

  friend bool operator==(const UncertaintyRealization&, const UncertaintyRealization&) = default;
};

/// Wind at farm m, period t under `v`, per unit of commitment ratio:
/// forecast + (upper - forecast) v^u + (lower - forecast) v^l.
inline double scenario_wind_per_ratio(const SystemCase& c, const UncertaintyRealization& v, int m, int t) {
  const auto mi = static_cast<std::size_t>(m);
  const auto ti = static_cast<std::size_t>(t);
  const double w = c.wind_farms[mi].forecast[ti];
  const auto& b = c.bands[mi];
  return w + (b.upper[ti] - w) * v.up_at(m, t) + (b.lower[ti] - w) * v.down_at(m, t);
}

struct Cut {
  int iteration = 0;
  UncertaintyRealization realization;
  std::string copy_id;  ///< prefix of the recourse copy variables, e.g. "p[2]"
};

/// Ordered set of cuts; rejects a realization already present.
class CutPool {
 public:
  [[nodiscard]] bool contains(const UncertaintyRealization& v) const {
    return std::any_of(cuts_.begin(), cuts_.end(), [&](const Cut& c) { return c.realization == v; });
  }
  /// Appends a cut for `v`; returns false (pool unchanged) on a duplicate.
  bool add(int iteration, UncertaintyRealization v) {
    if (contains(v)) return false;
    cuts_.push_back({iteration, std::move(v), "p[" + std::to_string(iteration) + "]"});
    return true;
  }
  [[nodiscard]] std::size_t size() const { return cuts_.size(); }
  [[nodiscard]] bool empty() const { return cuts_.empty(); }
  [[nodiscard]] auto begin() const { return cuts_.begin(); }
  [[nodiscard]] auto end() const { return cuts_.end(); }
  [[nodiscard]] const Cut& operator[](std::size_t i) const { return cuts_[i]; }

 private:
  std::vector<Cut> cuts_;
};

struct CostBreakdown {
  double startup = 0.0;
  double no_load = 0.0;
  double energy = 0.0;

  [[nodiscard]] double uc() const { return startup + no_load; }
  [[nodiscard]] double ed() const { return energy; }
  [[nodiscard]] double total() const { return startup + no_load + energy; }
};

struct FirstStageDecision {
  int generators = 0;
  int farms = 0;
  int periods = 0;
  std::vector<std::uint8_t> u;  ///< g*T + t
  std::vector<std::uint8_t> z;  ///< g*T + t
  std::vector<double> p_hat;    ///< g*T + t, MW
  std::vector<double> alpha;    ///< m*T + t
  CostBreakdown cost;

  [[nodiscard]] bool on(int g, int t) const { return u[static_cast<std::size_t>(g * periods + t)] != 0; }
  [[nodiscard]] bool started(int g, int t) const { return z[static_cast<std::size_t>(g * periods + t)] != 0; }
  [[nodiscard]] double dispatch(int g, int t) const { return p_hat[static_cast<std::size_t>(g * periods + t)]; }
  [[nodiscard]] double ratio(int m, int t) const { return alpha[static_cast<std::size_t>(m * periods + t)]; }
};

struct MasterOptions {
  int segments = 4;
  /// Reward per unit of sum(alpha) subtracted from the objective. Zero disables it.
  double alpha_bonus = 0.0;
};

/// True when alpha_mt has no effect at all: zero forecast and a degenerate band.
inline bool alpha_is_inert(const SystemCase& c, int m, int t) {
  const auto mi = static_cast<std::size_t>(m);
  const auto ti = static_cast<std::size_t>(t);
  return c.wind_farms[mi].forecast[ti] == 0.0 && c.bands[mi].upper[ti] == 0.0 &&
         c.bands[mi].lower[ti] == 0.0;
}

struct MasterModel {
  milp::ModelBuilder model;
  Mode mode = Mode::Wgc;
  int generators = 0;
  int farms = 0;
  int periods = 0;
  std::vector<milp::Var> u, z, p_hat, alpha;
  std::vector<std::vector<milp::Var>> segments;  ///< per g*T + t
  std::vector<PiecewiseLinearCost> pwl;          ///< per generator
  std::vector<std::vector<milp::Var>> copies;    ///< per cut, g*T + t
  milp::LinearExpr cost;                         ///< startup + no-load + energy
  double alpha_bonus = 0.0;
};

namespace detail {

inline std::string gt_name(const SystemCase& c, int g, int t) {
  return "[" + c.generators[static_cast<std::size_t>(g)].id + "," + std::to_string(t + 1) + "]";
}
inline std::string mt_name(const SystemCase& c, int m, int t) {
  return "[" + c.wind_farms[static_cast<std::size_t>(m)].id + "," + std::to_string(t + 1) + "]";
}

/// Adds `row` over generation variables `gen`, u and alpha. Slack columns are dropped and
/// the realized wind is alpha times the scenario coefficient of `v`.
inline void add_scenario_row(MasterModel& mm, const SystemCase& c, const CompactForm& form,
                             const CompactRow& row, const std::vector<milp::Var>& gen,
                             const UncertaintyRealization& v, const std::string& prefix) {
  milp::LinearExpr lhs;
  const int gt = form.generators * form.periods;
  for (const auto& [col, coef] : row.terms) {
    if (col < gt) lhs.add(gen[static_cast<std::size_t>(col)], coef);
  }
  for (const auto& [i, coef] : row.commitment) lhs.add(mm.u[static_cast<std::size_t>(i)], -coef);
  for (const auto& [i, coef] : row.wind) {
    const int m = i / form.periods;
    const int t = i % form.periods;
    lhs.add(mm.alpha[static_cast<std::size_t>(i)], -coef * scenario_wind_per_ratio(c, v, m, t));
  }
  mm.model.add_constraint(prefix + row.name, lhs,
                          row.equality ? milp::RowSense::Equal : milp::RowSense::LessEqual, row.rhs);
}

}  // namespace detail

/// First-stage model with one recourse copy per cut in `cuts`.
inline MasterModel build_master(const SystemCase& c, const CompactForm& form, const CutPool& cuts,
                                Mode mode, const MasterOptions& opt = {}) {
  using milp::RowSense;
  MasterModel mm;
  mm.model = milp::ModelBuilder(c.name.empty() ? "master" : "master_" + c.name);
  mm.mode = mode;
  mm.generators = c.num_generators();
  mm.farms = c.num_farms();
  mm.periods = c.horizon;
  mm.alpha_bonus = opt.alpha_bonus;
  const int G = mm.generators;
  const int M = mm.farms;
  const int T = mm.periods;
  auto& model = mm.model;

  for (int g = 0; g < G; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    mm.pwl.push_back(piecewise_linearize(gen.cost, gen.p_min, gen.p_max, opt.segments));
    for (int t = 0; t < T; ++t) mm.u.push_back(model.add_binary("u" + detail::gt_name(c, g, t)));
  }
  for (int g = 0; g < G; ++g)
    for (int t = 0; t < T; ++t) mm.z.push_back(model.add_binary("z" + detail::gt_name(c, g, t)));
  for (int g = 0; g < G; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    for (int t = 0; t < T; ++t) mm.p_hat.push_back(model.add_continuous("phat" + detail::gt_name(c, g, t), 0.0, gen.p_max));
  }
  for (int m = 0; m < M; ++m)
    for (int t = 0; t < T; ++t) mm.alpha.push_back(model.add_continuous("alpha" + detail::mt_name(c, m, t), 0.0, 1.0));

  // Piecewise-linear energy cost: phat = pmin u + sum_k seg_k, 0 <= seg_k <= width_k.
  for (int g = 0; g < G; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    const auto& pwl = mm.pwl[static_cast<std::size_t>(g)];
    for (int t = 0; t < T; ++t) {
      const auto i = static_cast<std::size_t>(g * T + t);
      std::vector<milp::Var> segs;
      milp::LinearExpr fill = gen.p_min * mm.u[i];
      for (int k = 0; k < pwl.segments(); ++k) {
        const std::string n = "seg[" + gen.id + "," + std::to_string(t + 1) + "," + std::to_string(k + 1) + "]";
        segs.push_back(model.add_continuous(n, 0.0, pwl.width(k)));
        fill.add(segs.back(), 1.0);
      }
      model.add_constraint("pwl" + detail::gt_name(c, g, t), mm.p_hat[i], RowSense::Equal, fill);
      mm.segments.push_back(std::move(segs));
    }
  }

  // Minimum up/down times, start-up indicators, initial-status windows.
  for (int g = 0; g < G; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    const double u0 = gen.initial.on ? 1.0 : 0.0;
    auto u_at = [&](int t) { return mm.u[static_cast<std::size_t>(g * T + t)]; };
    auto prev = [&](int t) -> milp::LinearExpr {
      if (t == 0) return u0;
      return u_at(t - 1);
    };
    for (int t = 0; t < T; ++t) {
      for (int k = t + 1; k < std::min(t + gen.min_on, T); ++k) {
        model.add_constraint("min_up[" + gen.id + "," + std::to_string(t + 1) + "," + std::to_string(k + 1) + "]",
                             -prev(t) + u_at(t) - u_at(k), RowSense::LessEqual, 0.0);
      }
      for (int k = t + 1; k < std::min(t + gen.min_off, T); ++k) {
        model.add_constraint("min_down[" + gen.id + "," + std::to_string(t + 1) + "," + std::to_string(k + 1) + "]",
                             prev(t) - u_at(t) + u_at(k), RowSense::LessEqual, 1.0);
      }
      model.add_constraint("startup" + detail::gt_name(c, g, t),
                           -prev(t) + u_at(t) - mm.z[static_cast<std::size_t>(g * T + t)],
                           RowSense::LessEqual, 0.0);
    }
    const int hold = gen.initial.on ? gen.min_on - gen.initial.hours : gen.min_off - gen.initial.hours;
    for (int t = 0; t < std::min(hold, T); ++t) {
      model.add_constraint("init_status" + detail::gt_name(c, g, t), u_at(t), RowSense::Equal, u0);
    }
  }

  // Wind commitment ratio.
  for (int m = 0; m < M; ++m) {
    for (int t = 0; t < T; ++t) {
      if (mode == Mode::Traditional || alpha_is_inert(c, m, t)) {
        model.add_constraint("alpha_fix" + detail::mt_name(c, m, t), mm.alpha[static_cast<std::size_t>(m * T + t)],
                             RowSense::Equal, 1.0);
      }
    }
  }

  // Base-case rows: the recourse rows on phat at the forecast, without slacks.
  const auto nominal = UncertaintyRealization::zeros(M, T);
  for (const auto& row : form.rows) {
    if (row.slack_only || row.redundant) continue;
    detail::add_scenario_row(mm, c, form, row, mm.p_hat, nominal, "");
  }

  // Scenario copies p^k sharing u and alpha with the base case.
  for (const auto& cut : cuts) {
    std::vector<milp::Var> copy;
    for (int g = 0; g < G; ++g) {
      const auto& gen = c.generators[static_cast<std::size_t>(g)];
      for (int t = 0; t < T; ++t) {
        copy.push_back(model.add_continuous(cut.copy_id + detail::gt_name(c, g, t), 0.0, gen.p_max));
      }
    }
    const std::string prefix = "cut" + std::to_string(cut.iteration) + ":";
    for (const auto& row : form.rows) {
      if (row.slack_only || row.redundant) continue;
      detail::add_scenario_row(mm, c, form, row, copy, cut.realization, prefix);
    }
    mm.copies.push_back(std::move(copy));
  }

  // Objective: start-up + no-load + piecewise-linear energy.
  milp::LinearExpr cost;
  for (int g = 0; g < G; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    const auto& pwl = mm.pwl[static_cast<std::size_t>(g)];
    for (int t = 0; t < T; ++t) {
      const auto i = static_cast<std::size_t>(g * T + t);
      cost.add(mm.z[i], gen.startup_cost);
      cost.add(mm.u[i], gen.no_load_cost + pwl.intercept);
      for (int k = 0; k < pwl.segments(); ++k) cost.add(mm.segments[i][static_cast<std::size_t>(k)], pwl.slopes[static_cast<std::size_t>(k)]);
    }
  }
  mm.cost = cost;
  milp::LinearExpr objective = cost;
  if (opt.alpha_bonus != 0.0) {
    for (const auto& a : mm.alpha) objective.add(a, -opt.alpha_bonus);
  }
  model.set_objective(milp::ObjectiveSense::Minimize, objective);
  return mm;
}

inline MasterModel build_master(const SystemCase& c, const CutPool& cuts, Mode mode,
                                const MasterOptions& opt = {}) {
  return build_master(c, compile_recourse(c), cuts, mode, opt);
}

/// Every maximal on-run must last min_on hours and every off-run min_off hours,
/// counting hours carried in from the initial state. Runs cut off by the end of
/// the horizon are exempt. Returns a description of the first violation.
inline std::optional<std::string> check_min_up_down(const SystemCase& c, const FirstStageDecision& d) {
  for (int g = 0; g < d.generators; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    bool state = gen.initial.on;
    int run = gen.initial.hours;
    for (int t = 0; t < d.periods; ++t) {
      const bool now = d.on(g, t);
      if (now == state) {
        ++run;
        continue;
      }
      const int need = state ? gen.min_on : gen.min_off;
      if (run < need) {
        return "generator '" + gen.id + "': " + (state ? "on" : "off") + "-run of " + std::to_string(run) +
               " h ends before period " + std::to_string(t + 1) + " (minimum " + std::to_string(need) + ")";
      }
      state = now;
      run = 1;
    }
  }
  return std::nullopt;
}

namespace detail {

inline FirstStageDecision decision_from_values(const MasterModel& mm, std::span<const double> x,
                                               const SystemCase& c) {
  FirstStageDecision d;
  d.generators = mm.generators;
  d.farms = mm.farms;
  d.periods = mm.periods;
  const int T = mm.periods;
  constexpr double tol = 1e-6;
  for (int g = 0; g < mm.generators; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    const auto& pwl = mm.pwl[static_cast<std::size_t>(g)];
    std::uint8_t prev = gen.initial.on ? 1 : 0;
    for (int t = 0; t < T; ++t) {
      const auto i = static_cast<std::size_t>(g * T + t);
      const std::uint8_t on = x[mm.u[i].index] > 0.5 ? 1 : 0;
      const std::uint8_t st = x[mm.z[i].index] > 0.5 ? 1 : 0;
      double p = x[mm.p_hat[i].index];
      const double scale = std::max(1.0, gen.p_max);
      const double lo = on ? gen.p_min : 0.0;
      const double hi = on ? gen.p_max : 0.0;
      if (p < lo - tol * scale || p > hi + tol * scale) {
        throw ModelError("capacity" + gt_name(c, g, t) + ": dispatch " + std::to_string(p) +
                         " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "] after rounding");
      }
      if (st < on - prev) throw ModelError("startup" + gt_name(c, g, t) + " violated after rounding");
      p = std::clamp(p, lo, hi);
      d.u.push_back(on);
      d.z.push_back(st);
      d.p_hat.push_back(p);
      d.cost.startup += gen.startup_cost * st;
      d.cost.no_load += gen.no_load_cost * on;
      double energy = pwl.intercept * on;
      for (int k = 0; k < pwl.segments(); ++k) {
        const double s = std::clamp(x[mm.segments[i][static_cast<std::size_t>(k)].index], 0.0, pwl.width(k));
        energy += pwl.slopes[static_cast<std::size_t>(k)] * s;
      }
      d.cost.energy += energy;
      prev = on;
    }
  }
  for (int m = 0; m < mm.farms; ++m) {
    for (int t = 0; t < T; ++t) {
      const auto i = static_cast<std::size_t>(m * T + t);
      const double a = x[mm.alpha[i].index];
      if (a < -tol || a > 1.0 + tol) throw ModelError("alpha" + mt_name(c, m, t) + " outside [0, 1]");
      d.alpha.push_back(std::clamp(a, 0.0, 1.0));
    }
  }
  if (const auto bad = check_min_up_down(c, d)) throw ModelError("min up/down: " + *bad);
  return d;
}

}  // namespace detail

/// First-stage decision from a master solve, with binaries rounded and invariants re-checked.
inline FirstStageDecision extract_first_stage(const MasterModel& mm, const milp::SolveResult& result,
                                              const SystemCase& c) {
  if (!result.has_solution()) {
    throw ModelError("extract_first_stage: master result carries no solution (status " +
                     std::string(milp::to_string(result.status)) + ")");
  }
  FirstStageDecision d = detail::decision_from_values(mm, *result.values, c);
  double bonus = 0.0;
  for (double a : d.alpha) bonus += mm.alpha_bonus * a;
  const double expected = result.objective + bonus;
  if (std::abs(d.cost.total() - expected) > 1e-6 * std::max(1.0, std::abs(expected))) {
    throw ModelError("extract_first_stage: cost breakdown " + std::to_string(d.cost.total()) +
                     " does not match master objective " + std::to_string(expected));
  }
  return d;
}

/// Tie-break among cost-optimal masters.
enum class AlphaTieBreak {
  None,       ///< whatever the backend returns
  MaxCommit,  ///< re-solve with u, z fixed to maximize sum(alpha) at no extra cost
};

struct MasterOutcome {
  milp::SolveResult result;  ///< the MILP solve
  std::optional<FirstStageDecision> decision;
};

/// Solves the master and, on success, extracts the first stage.
///
/// With AlphaTieBreak::MaxCommit an LP over the continuous variables (u, z fixed)
/// maximizes the committed ratios subject to cost <= the MILP cost; a second LP with
/// those ratios pinned settles the dispatch that the decision is read from.
inline MasterOutcome solve_master(const MasterModel& mm, const SystemCase& c,
                                  const milp::SolverParams& params,
                                  AlphaTieBreak tie_break = AlphaTieBreak::None) {
  MasterOutcome out;
  out.result = milp::solve(mm.model, params);
  if (!out.result.has_solution()) return out;
  out.decision = extract_first_stage(mm, out.result, c);
  if (tie_break == AlphaTieBreak::None || mm.mode == Mode::Traditional || mm.alpha.empty()) return out;

  milp::ModelBuilder lp = mm.model;
  const auto& d = *out.decision;
  for (std::size_t i = 0; i < mm.u.size(); ++i) {
    lp.set_bounds(mm.u[i], d.u[i], d.u[i]);
    lp.set_bounds(mm.z[i], d.z[i], d.z[i]);
  }
  const double cap = d.cost.total();
  lp.add_constraint("cost_cap", mm.cost, milp::RowSense::LessEqual, cap + 1e-7 * std::max(1.0, std::abs(cap)));
  milp::LinearExpr commit;
  for (const auto& a : mm.alpha) commit.add(a, 1.0);
  lp.set_objective(milp::ObjectiveSense::Maximize, commit);
  const auto widest = milp::solve(lp, params);
  if (!widest.has_solution()) return out;

  // Pin the ratios and re-minimize so the reported cost is an exact LP optimum.
  milp::ModelBuilder settle = mm.model;
  for (std::size_t i = 0; i < mm.u.size(); ++i) {
    settle.set_bounds(mm.u[i], d.u[i], d.u[i]);
    settle.set_bounds(mm.z[i], d.z[i], d.z[i]);
  }
  for (const auto& a : mm.alpha) {
    const double v = std::clamp((*widest.values)[a.index], 0.0, 1.0);
    settle.set_bounds(a, v, v);
  }
  const auto polished = milp::solve(settle, params);
  if (!polished.has_solution()) return out;
  out.decision = extract_first_stage(mm, polished, c);
  return out;
}

}  // namespace ruc

#endif  // RUC_MASTER_PROBLEM_HPP
