#ifndef RUC_SUBPROBLEM_HPP
#define RUC_SUBPROBLEM_HPP

// Adversarial feasibility check of a first-stage decision: the recourse LP at a
// given wind trajectory, its dual over the budgeted vertex set with big-M
// products, and the adaptive-M driver that returns the worst-case slack R.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ruc/compact_form.hpp"
#include "ruc/errors.hpp"
#include "ruc/master_problem.hpp"
#include "ruc/milp/model.hpp"
#include "ruc/milp/solve.hpp"
#include "ruc/system_model.hpp"

namespace ruc {

/// Realized wind m*T + t under commitment ratios `alpha` and band choice `v`.
inline std::vector<double> realized_wind(const SystemCase& c, const std::vector<double>& alpha,
                                         const UncertaintyRealization& v) {
  const int M = c.num_farms();
  const int T = c.horizon;
  if (v.farms != M || v.periods != T) throw InputError("realization shape does not match the case");
  if (alpha.size() != static_cast<std::size_t>(M * T)) throw InputError("alpha shape does not match the case");
  std::vector<double> w(alpha.size());
  for (int m = 0; m < M; ++m) {
    for (int t = 0; t < T; ++t) {
      if (v.up_at(m, t) && v.down_at(m, t)) {
        throw InputError("realization selects both band edges at farm '" +
                         c.wind_farms[static_cast<std::size_t>(m)].id + "', period " + std::to_string(t + 1));
      }
      const auto i = v.index(m, t);
      w[i] = alpha[i] * scenario_wind_per_ratio(c, v, m, t);
    }
  }
  return w;
}

inline std::vector<double> realized_wind(const SystemCase& c, const FirstStageDecision& d,
                                         const UncertaintyRealization& v) {
  return realized_wind(c, d.alpha, v);
}

struct RecourseLp {
  milp::ModelBuilder model;
  std::vector<milp::Var> p;   ///< g*T + t
  std::vector<milp::Var> dw;  ///< m*T + t
  std::vector<milp::Var> dD;  ///< j*T + t
};

/// Minimal load shedding plus curtailment needed to operate commitment `d` when
/// wind `w` (m*T + t, MW) materializes.
inline RecourseLp build_recourse_lp(const SystemCase& c, const FirstStageDecision& d,
                                    const std::vector<double>& w) {
  using milp::RowSense;
  const int G = c.num_generators();
  const int M = c.num_farms();
  const int J = c.num_loads();
  const int T = c.horizon;
  RecourseLp lp;
  lp.model = milp::ModelBuilder("recourse");
  auto& mb = lp.model;
  auto at = [T](int i, int t) { return static_cast<std::size_t>(i * T + t); };

  for (int g = 0; g < G; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    for (int t = 0; t < T; ++t) {
      const double on = d.on(g, t) ? 1.0 : 0.0;
      lp.p.push_back(mb.add_continuous("p[" + gen.id + "," + std::to_string(t + 1) + "]", on * gen.p_min, on * gen.p_max));
    }
  }
  for (int m = 0; m < M; ++m) {
    const auto& farm = c.wind_farms[static_cast<std::size_t>(m)];
    for (int t = 0; t < T; ++t) {
      lp.dw.push_back(mb.add_continuous("dw[" + farm.id + "," + std::to_string(t + 1) + "]", 0.0, std::max(0.0, w[at(m, t)])));
    }
  }
  for (int j = 0; j < J; ++j) {
    const auto& load = c.loads[static_cast<std::size_t>(j)];
    for (int t = 0; t < T; ++t) {
      lp.dD.push_back(mb.add_continuous("dD[" + load.id + "," + std::to_string(t + 1) + "]", 0.0,
                                        load.demand[static_cast<std::size_t>(t)]));
    }
  }

  for (int g = 0; g < G; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    for (int t = 0; t < T; ++t) {
      const std::string tag = "[" + gen.id + "," + std::to_string(t + 1) + "]";
      const double u_now = d.on(g, t) ? 1.0 : 0.0;
      const double u_prev = t == 0 ? (gen.initial.on ? 1.0 : 0.0) : (d.on(g, t - 1) ? 1.0 : 0.0);
      milp::LinearExpr prev = t == 0 ? milp::LinearExpr(gen.initial.p0) : milp::LinearExpr(lp.p[at(g, t - 1)]);
      milp::LinearExpr now = lp.p[at(g, t)];
      mb.add_constraint("ramp_down" + tag, prev - now, RowSense::LessEqual,
                        u_now * gen.ramp_down + (1.0 - u_now) * gen.p_max);
      mb.add_constraint("ramp_up" + tag, now - prev, RowSense::LessEqual,
                        u_prev * gen.ramp_up + (1.0 - u_prev) * gen.p_max);
    }
  }

  const auto& net = c.network;
  for (int t = 0; t < T; ++t) {
    milp::LinearExpr supply;
    milp::LinearExpr served;
    for (int g = 0; g < G; ++g) supply += lp.p[at(g, t)];
    for (int m = 0; m < M; ++m) supply += w[at(m, t)] - lp.dw[at(m, t)];
    for (int j = 0; j < J; ++j) served += c.loads[static_cast<std::size_t>(j)].demand[static_cast<std::size_t>(t)] - lp.dD[at(j, t)];
    mb.add_constraint("balance[" + std::to_string(t + 1) + "]", supply, RowSense::Equal, served);

    for (int l = 0; l < c.num_lines(); ++l) {
      const auto& line = net.lines[static_cast<std::size_t>(l)];
      const auto li = static_cast<std::size_t>(l);
      milp::LinearExpr flow;
      for (int g = 0; g < G; ++g) {
        flow.add(lp.p[at(g, t)], net.shift_factor(li, c.generators[static_cast<std::size_t>(g)].bus));
      }
      for (int m = 0; m < M; ++m) {
        const double pi = net.shift_factor(li, c.wind_farms[static_cast<std::size_t>(m)].bus);
        flow += pi * (w[at(m, t)] - lp.dw[at(m, t)]);
      }
      for (int j = 0; j < J; ++j) {
        const auto& load = c.loads[static_cast<std::size_t>(j)];
        const double pi = net.shift_factor(li, load.bus);
        flow -= pi * (load.demand[static_cast<std::size_t>(t)] - lp.dD[at(j, t)]);
      }
      const std::string tag = "[" + line.id + "," + std::to_string(t + 1) + "]";
      mb.add_constraint("flow_max" + tag, flow, RowSense::LessEqual, line.capacity);
      mb.add_constraint("flow_min" + tag, flow, RowSense::GreaterEqual, -line.capacity);
    }
  }

  milp::LinearExpr slack;
  for (const auto& v : lp.dw) slack += v;
  for (const auto& v : lp.dD) slack += v;
  mb.set_objective(milp::ObjectiveSense::Minimize, slack);
  return lp;
}

inline RecourseLp build_recourse_lp(const SystemCase& c, const FirstStageDecision& d,
                                    const UncertaintyRealization& v) {
  return build_recourse_lp(c, d, realized_wind(c, d, v));
}

/// Optimum of the recourse LP, or nullopt when no recourse dispatch exists.
inline std::optional<double> recourse_optimum(const SystemCase& c, const FirstStageDecision& d,
                                              const std::vector<double>& w,
                                              const milp::SolverParams& params = {}) {
  const auto lp = build_recourse_lp(c, d, w);
  const auto r = milp::solve(lp.model, params);
  if (r.status == milp::SolveStatus::Infeasible) return std::nullopt;
  if (r.status != milp::SolveStatus::Optimal) {
    throw SolverError("recourse LP: " + std::string(milp::to_string(r.status)) +
                      (r.message.empty() ? "" : " (" + r.message + ")"));
  }
  return std::max(0.0, r.objective);
}

/// One dual row block: a <=-row of the compact recourse system at fixed u and alpha.
/// The right-hand side is b0 + sum_j q_j v_j over the adversary's binaries j.
struct DualRow {
  std::string name;
  std::vector<std::pair<int, double>> terms;  ///< recourse column -> coefficient
  double b0 = 0.0;
  std::vector<std::pair<int, double>> q;      ///< index into DualSubproblem::v -> coefficient
  int partner = -1;  ///< the other half of a split equality, if any
};

struct DualSubproblem {
  milp::ModelBuilder model;
  double big_m = 0.0;
  std::vector<DualRow> rows;
  std::vector<milp::Var> lambda;                           ///< per row
  std::vector<std::vector<std::pair<int, milp::Var>>> gamma;  ///< per row: (v index, gamma var)
  std::vector<milp::Var> v;  ///< [0, M*T) up, [M*T, 2*M*T) down, both m*T + t
  int farms = 0;
  int periods = 0;

  [[nodiscard]] milp::Var up(int m, int t) const { return v[static_cast<std::size_t>(m * periods + t)]; }
  [[nodiscard]] milp::Var down(int m, int t) const {
    return v[static_cast<std::size_t>(farms * periods + m * periods + t)];
  }
};

/// <=-rows of the recourse system with u and alpha fixed by `d`; equalities are split.
inline std::vector<DualRow> dual_rows(const SystemCase& c, const CompactForm& form, const FirstStageDecision& d) {
  const int T = form.periods;
  const int MT = form.farms * T;
  std::vector<DualRow> out;
  for (const auto& row : form.rows) {
    if (row.redundant) continue;
    DualRow r;
    r.terms = row.terms;
    r.b0 = row.rhs;
    for (const auto& [i, coef] : row.commitment) r.b0 += coef * d.u[static_cast<std::size_t>(i)];
    for (const auto& [i, coef] : row.wind) {
      const int m = i / T;
      const int t = i % T;
      const auto mi = static_cast<std::size_t>(m);
      const auto ti = static_cast<std::size_t>(t);
      const double a = d.alpha[static_cast<std::size_t>(i)];
      const double w_hat = c.wind_farms[mi].forecast[ti];
      r.b0 += coef * a * w_hat;
      const double qu = coef * a * (c.bands[mi].upper[ti] - w_hat);
      const double ql = coef * a * (c.bands[mi].lower[ti] - w_hat);
      if (std::abs(qu) > 1e-12) r.q.emplace_back(i, qu);
      if (std::abs(ql) > 1e-12) r.q.emplace_back(MT + i, ql);
    }
    if (!row.equality) {
      r.name = row.name;
      out.push_back(std::move(r));
      continue;
    }
    DualRow neg = r;
    r.name = row.name + ":le";
    neg.name = row.name + ":ge";
    r.partner = static_cast<int>(out.size()) + 1;
    neg.partner = static_cast<int>(out.size());
    for (auto& [col, coef] : neg.terms) coef = -coef;
    neg.b0 = -neg.b0;
    for (auto& [j, coef] : neg.q) coef = -coef;
    out.push_back(std::move(r));
    out.push_back(std::move(neg));
  }
  return out;
}

/// Single-level MILP over (lambda, gamma, v) whose optimum is the worst-case
/// recourse slack over the budgeted vertex set, up to the big-M bound on lambda.
inline DualSubproblem build_dual_subproblem(const SystemCase& c, const CompactForm& form,
                                            const FirstStageDecision& d, double big_m) {
  using milp::RowSense;
  if (!(big_m > 0.0)) throw InputError("big-M must be positive");
  DualSubproblem ds;
  ds.model = milp::ModelBuilder("subproblem");
  ds.big_m = big_m;
  ds.farms = form.farms;
  ds.periods = form.periods;
  ds.rows = dual_rows(c, form, d);
  auto& mb = ds.model;
  const int T = form.periods;
  const int M = form.farms;

  for (const auto& r : ds.rows) ds.lambda.push_back(mb.add_continuous("lam[" + r.name + "]", -big_m, 0.0));
  for (int m = 0; m < M; ++m)
    for (int t = 0; t < T; ++t) ds.v.push_back(mb.add_binary("vu" + detail::mt_name(c, m, t)));
  for (int m = 0; m < M; ++m)
    for (int t = 0; t < T; ++t) ds.v.push_back(mb.add_binary("vl" + detail::mt_name(c, m, t)));

  // Dual feasibility: one row per recourse column, A^T lambda <= cost.
  std::vector<milp::LinearExpr> col_rows(form.columns.size());
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    for (const auto& [col, coef] : ds.rows[i].terms) col_rows[static_cast<std::size_t>(col)].add(ds.lambda[i], coef);
  }
  for (std::size_t j = 0; j < form.columns.size(); ++j) {
    const auto& col = form.columns[j];
    std::string name;
    switch (col.kind) {
      case RecourseColumn::Kind::Generation:
        name = "dual_p" + detail::gt_name(c, col.device, col.period);
        break;
      case RecourseColumn::Kind::Curtailment:
        name = "dual_dw" + detail::mt_name(c, col.device, col.period);
        break;
      case RecourseColumn::Kind::LoadShed:
        name = "dual_dD[" + c.loads[static_cast<std::size_t>(col.device)].id + "," + std::to_string(col.period + 1) + "]";
        break;
    }
    mb.add_constraint(name, col_rows[j], RowSense::LessEqual, col.cost);
  }

  // Budgets.
  for (int m = 0; m < M; ++m) {
    milp::LinearExpr used;
    for (int t = 0; t < T; ++t) {
      mb.add_constraint("one_edge" + detail::mt_name(c, m, t), ds.up(m, t) + ds.down(m, t), RowSense::LessEqual, 1.0);
      used += ds.up(m, t) + ds.down(m, t);
    }
    mb.add_constraint("budget_time[" + c.wind_farms[static_cast<std::size_t>(m)].id + "]", used, RowSense::LessEqual,
                      static_cast<double>(c.uncertainty.gamma_t));
  }
  for (int t = 0; t < T; ++t) {
    milp::LinearExpr used;
    for (int m = 0; m < M; ++m) used += ds.up(m, t) + ds.down(m, t);
    mb.add_constraint("budget_space[" + std::to_string(t + 1) + "]", used, RowSense::LessEqual,
                      static_cast<double>(c.uncertainty.gamma_s));
  }

  // Objective b0^T lambda + sum q_ij gamma_ij, gamma_ij = lambda_i v_j via envelopes.
  milp::LinearExpr obj;
  ds.gamma.resize(ds.rows.size());
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const auto& r = ds.rows[i];
    obj.add(ds.lambda[i], r.b0);
    for (const auto& [j, q] : r.q) {
      const auto vj = ds.v[static_cast<std::size_t>(j)];
      const std::string vname = mb.variables()[vj.index].name;
      const std::string pair = "[" + r.name + "," + vname + "]";
      const auto g = mb.add_continuous("gam" + pair, -big_m, 0.0);
      ds.gamma[i].emplace_back(j, g);
      obj.add(g, q);
      mb.add_constraint("env_v" + pair, g + big_m * vj, RowSense::GreaterEqual, 0.0);
      mb.add_constraint("env_lo" + pair, ds.lambda[i] - g - big_m * vj, RowSense::GreaterEqual, -big_m);
      mb.add_constraint("env_hi" + pair, ds.lambda[i] - g, RowSense::LessEqual, 0.0);
    }
  }
  mb.set_objective(milp::ObjectiveSense::Maximize, obj);
  return ds;
}

inline DualSubproblem build_dual_subproblem(const SystemCase& c, const FirstStageDecision& d, double big_m) {
  return build_dual_subproblem(c, compile_recourse(c), d, big_m);
}

/// Pins every adversary binary of `ds` to `v`.
inline void fix_realization(DualSubproblem& ds, const UncertaintyRealization& v) {
  for (int m = 0; m < ds.farms; ++m) {
    for (int t = 0; t < ds.periods; ++t) {
      const double u = v.up_at(m, t) ? 1.0 : 0.0;
      const double l = v.down_at(m, t) ? 1.0 : 0.0;
      ds.model.set_bounds(ds.up(m, t), u, u);
      ds.model.set_bounds(ds.down(m, t), l, l);
    }
  }
}

struct SubproblemOptions {
  double big_m = 1e4;
  double big_m_cap = 1e7;
  double saturation_fraction = 1e-3;  ///< lambda within this fraction of M from -M counts as saturated
};

struct BoundReport {
  double big_m = 0.0;     ///< M of the accepted solve
  int attempts = 0;       ///< MILP solves, including retries with doubled M
  std::vector<std::string> saturated;  ///< rows whose lambda sits at the bound and whose rhs is nonzero
  std::vector<std::string> inert;      ///< saturated lambdas on rows with zero rhs (no objective effect)
};

struct SubproblemResult {
  double R = 0.0;               ///< recourse optimum at v*, MW
  UncertaintyRealization v;     ///< worst-case realization
  double dual_objective = 0.0;  ///< bounded dual at v*, from the LP with v fixed
  double milp_objective = 0.0;
  double milp_bound = 0.0;
  BoundReport bounds;
};

namespace detail {

inline UncertaintyRealization read_realization(const DualSubproblem& ds, std::span<const double> x) {
  auto v = UncertaintyRealization::zeros(ds.farms, ds.periods);
  for (int m = 0; m < ds.farms; ++m) {
    for (int t = 0; t < ds.periods; ++t) {
      v.up[v.index(m, t)] = x[ds.up(m, t).index] > 0.5 ? 1 : 0;
      v.down[v.index(m, t)] = x[ds.down(m, t).index] > 0.5 ? 1 : 0;
    }
  }
  return v;
}

inline double rhs_at(const DualRow& r, const UncertaintyRealization& v) {
  double b = r.b0;
  const auto MT = static_cast<int>(v.up.size());
  for (const auto& [j, q] : r.q) {
    const bool on = j < MT ? v.up[static_cast<std::size_t>(j)] != 0 : v.down[static_cast<std::size_t>(j - MT)] != 0;
    if (on) b += q;
  }
  return b;
}

}  // namespace detail

/// Worst-case recourse slack of `d` over the budgeted vertex set.
///
/// The MILP's v* is re-evaluated twice: the dual with v fixed gives a clean dual
/// objective and the saturation check, and the primal recourse LP gives R. M is
/// doubled while a lambda with nonzero rhs saturates or the bounded dual falls
/// short of R. An infeasible recourse LP at v* is reported at once.
inline SubproblemResult solve_subproblem(const SystemCase& c, const CompactForm& form, const FirstStageDecision& d,
                                         const milp::SolverParams& params = {},
                                         const SubproblemOptions& opt = {}) {
  SubproblemResult out;
  double big_m = opt.big_m;
  for (int attempt = 1;; ++attempt) {
    auto ds = build_dual_subproblem(c, form, d, big_m);
    const auto res = milp::solve(ds.model, params);
    if (!res.has_solution()) {
      throw SolverError("subproblem MILP: " + std::string(milp::to_string(res.status)) +
                        (res.message.empty() ? "" : " (" + res.message + ")"));
    }
    out.v = detail::read_realization(ds, *res.values);
    out.milp_objective = res.objective;
    out.milp_bound = res.dual_bound;

    fix_realization(ds, out.v);
    const auto fixed = milp::solve(ds.model, params);
    if (!fixed.has_solution()) {
      throw SolverError("subproblem with fixed v: " + std::string(milp::to_string(fixed.status)));
    }
    out.dual_objective = fixed.objective;
    BoundReport rep;
    rep.big_m = big_m;
    rep.attempts = attempt;
    const double floor = -big_m * (1.0 - opt.saturation_fraction);
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
      double lam = fixed.value(ds.lambda[i]);
      if (const int k = ds.rows[i].partner; k >= 0) {
        // The halves of an equality only act through their difference.
        lam = std::min(0.0, lam - fixed.value(ds.lambda[static_cast<std::size_t>(k)]));
      }
      if (lam > floor) continue;
      const bool inert = std::abs(detail::rhs_at(ds.rows[i], out.v)) <= 1e-9;
      (inert ? rep.inert : rep.saturated).push_back(ds.rows[i].name);
    }
    out.bounds = rep;

    const auto primal = recourse_optimum(c, d, realized_wind(c, d, out.v), params);
    const bool short_of_primal = primal && out.dual_objective < *primal - 1e-6 * std::max(1.0, *primal);
    if (primal && rep.saturated.empty() && !short_of_primal) {
      out.R = *primal;
      return out;
    }
    if (!primal) {
      throw SolverError("subproblem: the recourse LP is infeasible at the worst-case realization, so the dual "
                        "is unbounded for any M; inspect the case for missing recourse (committed minimum output, "
                        "ramps or line limits)");
    }
    if (big_m * 2.0 > opt.big_m_cap) {
      throw SolverError("subproblem: dual multipliers stay at the big-M bound with M = " + std::to_string(big_m) +
                        " (row " + (rep.saturated.empty() ? std::string("?") : rep.saturated.front()) +
                        "); inspect the model");
    }
    big_m *= 2.0;
  }
}

inline SubproblemResult solve_subproblem(const SystemCase& c, const FirstStageDecision& d,
                                         const milp::SolverParams& params = {},
                                         const SubproblemOptions& opt = {}) {
  return solve_subproblem(c, compile_recourse(c), d, params, opt);
}

}  // namespace ruc

#endif  // RUC_SUBPROBLEM_HPP
