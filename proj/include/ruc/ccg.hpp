#ifndef RUC_CCG_HPP
#define RUC_CCG_HPP

// Column-and-constraint generation: alternate the master and the adversarial
// subproblem until the worst-case slack vanishes.

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ruc/compact_form.hpp"
#include "ruc/errors.hpp"
#include "ruc/master_problem.hpp"
#include "ruc/milp/solve.hpp"
#include "ruc/oracle.hpp"
#include "ruc/subproblem.hpp"
#include "ruc/system_model.hpp"

namespace ruc {

enum class RucStatus {
  Converged,        ///< worst-case slack at or below epsilon
  RobustInfeasible, ///< the master became infeasible: no first stage survives the cuts
  IterationLimit,
  Plateau,          ///< stopped by the |R_k - R_{k-1}| rule with R still above epsilon
  Error,
};

inline std::string_view to_string(RucStatus s) {
  switch (s) {
    case RucStatus::Converged: return "Converged";
    case RucStatus::RobustInfeasible: return "RobustInfeasible";
    case RucStatus::IterationLimit: return "IterationLimit";
    case RucStatus::Plateau: return "Plateau";
    case RucStatus::Error: return "Error";
  }
  return "Error";
}

struct RucOptions {
  Mode mode = Mode::Wgc;
  double epsilon_feas = 1e-4;  ///< MW
  int max_iter = 50;
  milp::SolverParams solver;
  MasterOptions master;
  SubproblemOptions subproblem;
  AlphaTieBreak tie_break = AlphaTieBreak::MaxCommit;
  /// Also stop once consecutive R values differ by less than `delta_r_epsilon`.
  bool delta_r_stop = false;
  double delta_r_epsilon = 1e-4;
};

struct IterationRecord {
  int k = 0;
  milp::SolveStatus master_status = milp::SolveStatus::Error;
  double master_objective = std::nan("");
  double master_bound = std::nan("");
  double R = std::nan("");  ///< NaN when the subproblem did not run
  std::optional<UncertaintyRealization> v;
  double master_seconds = 0.0;
  double subproblem_seconds = 0.0;
  double big_m = 0.0;
};

struct Certificate {
  std::string method;  ///< "dual" or "enumeration"
  double R = std::nan("");
  bool robust = false;  ///< R <= epsilon
  std::uint64_t vectors = 0;  ///< realizations checked (enumeration only)
  std::optional<UncertaintyRealization> v;
};

struct RucSolution {
  RucStatus status = RucStatus::Error;
  Mode mode = Mode::Wgc;
  std::string message;
  std::optional<FirstStageDecision> decision;  ///< last master's first stage
  std::vector<IterationRecord> iterations;
  double final_R = std::nan("");
  double epsilon_feas = 1e-4;
  std::optional<Certificate> certificate;

  [[nodiscard]] bool converged() const { return status == RucStatus::Converged; }
  [[nodiscard]] CostBreakdown cost() const { return decision ? decision->cost : CostBreakdown{}; }
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Runs the loop: master, subproblem, cut, until R <= epsilon or a stop rule fires.
inline RucSolution solve_ruc(const SystemCase& c, const RucOptions& opt = {}, const IterationCallback& on_iteration = {}) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };

  RucSolution sol;
  sol.mode = opt.mode;
  sol.epsilon_feas = opt.epsilon_feas;
  try {
    const auto form = compile_recourse(c);
    CutPool pool;
    for (int k = 1; k <= opt.max_iter; ++k) {
      IterationRecord rec;
      rec.k = k;
      const auto t0 = clock::now();
      const auto mm = build_master(c, form, pool, opt.mode, opt.master);
      const auto master = solve_master(mm, c, opt.solver, opt.tie_break);
      rec.master_seconds = seconds(t0, clock::now());
      rec.master_status = master.result.status;
      rec.master_objective = master.result.objective;
      rec.master_bound = master.result.dual_bound;

      if (master.result.status == milp::SolveStatus::Infeasible) {
        sol.iterations.push_back(rec);
        if (on_iteration) on_iteration(rec);
        sol.status = RucStatus::RobustInfeasible;
        sol.message = k == 1 ? "the deterministic master is infeasible"
                             : "no first stage satisfies the " + std::to_string(pool.size()) + " scenario cut(s)";
        return sol;
      }
      if (!master.decision) {
        sol.iterations.push_back(rec);
        if (on_iteration) on_iteration(rec);
        sol.status = RucStatus::Error;
        sol.message = "master: " + std::string(milp::to_string(master.result.status)) +
                      (master.result.message.empty() ? "" : " (" + master.result.message + ")");
        return sol;
      }
      sol.decision = master.decision;

      const auto t1 = clock::now();
      const auto sub = solve_subproblem(c, form, *master.decision, opt.solver, opt.subproblem);
      rec.subproblem_seconds = seconds(t1, clock::now());
      rec.R = sub.R;
      rec.v = sub.v;
      rec.big_m = sub.bounds.big_m;
      sol.iterations.push_back(rec);
      if (on_iteration) on_iteration(rec);
      sol.final_R = sub.R;

      if (sub.R <= opt.epsilon_feas) {
        sol.status = RucStatus::Converged;
        return sol;
      }
      if (opt.delta_r_stop && k > 1) {
        const double prev = sol.iterations[sol.iterations.size() - 2].R;
        if (std::abs(sub.R - prev) < opt.delta_r_epsilon) {
          sol.status = RucStatus::Plateau;
          sol.message = "consecutive worst-case slacks differ by less than " + std::to_string(opt.delta_r_epsilon);
          return sol;
        }
      }
      if (!pool.add(k, sub.v)) {
        sol.status = RucStatus::Error;
        sol.message = "subproblem proposed a realization already in the cut pool with R = " + std::to_string(sub.R) +
                      " MW (tolerance mismatch between master cuts and subproblem)";
        return sol;
      }
    }
    sol.status = RucStatus::IterationLimit;
    sol.message = "no convergence within " + std::to_string(opt.max_iter) + " iterations";
  } catch (const std::exception& e) {
    sol.status = RucStatus::Error;
    sol.message = e.what();
  }
  return sol;
}

enum class CertifyMethod { Dual, Enumeration };

inline std::string_view to_string(CertifyMethod m) { return m == CertifyMethod::Dual ? "dual" : "enumeration"; }

/// Re-evaluates the worst-case slack at the solution's first stage.
inline Certificate certify(const SystemCase& c, const FirstStageDecision& d, CertifyMethod method,
                           double epsilon_feas = 1e-4, const milp::SolverParams& params = {},
                           const SubproblemOptions& sub = {}, std::uint64_t cap = kDefaultEnumerationCap) {
  Certificate cert;
  cert.method = std::string(to_string(method));
  if (method == CertifyMethod::Dual) {
    const auto r = solve_subproblem(c, d, params, sub);
    cert.R = r.R;
    cert.v = r.v;
  } else {
    const auto r = worst_case_by_enumeration(c, d, params, cap);
    cert.R = r.R;
    cert.v = r.v;
    cert.vectors = r.vectors;
  }
  cert.robust = cert.R <= epsilon_feas;
  return cert;
}

inline Certificate certify(const SystemCase& c, const RucSolution& s, CertifyMethod method,
                           const milp::SolverParams& params = {}, const SubproblemOptions& sub = {},
                           std::uint64_t cap = kDefaultEnumerationCap) {
  if (!s.decision) throw InputError("certify: solution carries no first-stage decision");
  return certify(c, *s.decision, method, s.epsilon_feas, params, sub, cap);
}

}  // namespace ruc

#endif  // RUC_CCG_HPP
