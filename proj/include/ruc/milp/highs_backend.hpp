#ifndef RUC_MILP_HIGHS_BACKEND_HPP
#define RUC_MILP_HIGHS_BACKEND_HPP

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Highs.h>

#include "ruc/milp/solve.hpp"

namespace ruc::milp {

namespace detail {

/// Column-wise HiGHS model for `model`.
inline HighsModel to_highs_model(const ModelBuilder& model) {
  const auto& vars = model.variables();
  const auto& rows = model.constraints();
  HighsLp lp;
  lp.model_name_ = model.name();
  lp.num_col_ = static_cast<HighsInt>(vars.size());
  lp.num_row_ = static_cast<HighsInt>(rows.size());
  lp.col_cost_.assign(vars.size(), 0.0);
  lp.col_lower_.resize(vars.size());
  lp.col_upper_.resize(vars.size());
  bool any_integer = false;
  std::vector<HighsVarType> integrality(vars.size(), HighsVarType::kContinuous);
  for (std::size_t j = 0; j < vars.size(); ++j) {
    lp.col_lower_[j] = vars[j].lower;
    lp.col_upper_[j] = vars[j].upper;
    if (vars[j].kind == VarKind::Binary) {
      integrality[j] = HighsVarType::kInteger;
      any_integer = true;
    }
  }
  for (const auto& t : model.objective_terms()) lp.col_cost_[t.var.index] += t.coef;
  lp.offset_ = model.objective_constant();
  lp.sense_ = model.objective_sense() == ObjectiveSense::Maximize ? ObjSense::kMaximize
                                                                  : ObjSense::kMinimize;

  lp.row_lower_.resize(rows.size());
  lp.row_upper_.resize(rows.size());
  std::vector<HighsInt> count(vars.size() + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    lp.row_lower_[i] = r.sense == RowSense::LessEqual ? -kHighsInf : r.rhs;
    lp.row_upper_[i] = r.sense == RowSense::GreaterEqual ? kHighsInf : r.rhs;
    for (const auto& t : r.terms) ++count[t.var.index + 1];
  }
  auto& a = lp.a_matrix_;
  a.format_ = MatrixFormat::kColwise;
  a.num_col_ = lp.num_col_;
  a.num_row_ = lp.num_row_;
  a.start_.assign(vars.size() + 1, 0);
  for (std::size_t j = 0; j < vars.size(); ++j) a.start_[j + 1] = a.start_[j] + count[j + 1];
  a.index_.resize(static_cast<std::size_t>(a.start_.back()));
  a.value_.resize(static_cast<std::size_t>(a.start_.back()));
  std::vector<HighsInt> fill(a.start_.begin(), a.start_.end() - 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& t : rows[i].terms) {
      const auto k = static_cast<std::size_t>(fill[t.var.index]++);
      a.index_[k] = static_cast<HighsInt>(i);
      a.value_[k] = t.coef;
    }
  }
  if (any_integer) lp.integrality_ = std::move(integrality);
  HighsModel hm;
  hm.lp_ = std::move(lp);
  return hm;
}

}  // namespace detail

class HighsBackend final : public Backend {
 public:
  [[nodiscard]] std::string_view name() const override { return "highs"; }

  [[nodiscard]] SolveResult run(const ModelBuilder& model, const SolverParams& params) const override {
    HighsModel hm = detail::to_highs_model(model);
    const bool is_mip = !hm.lp_.integrality_.empty();

    auto configure = [&](Highs& h, bool presolve) {
      h.setOptionValue("output_flag", false);
      h.setOptionValue("mip_rel_gap", params.relative_gap);
      h.setOptionValue("mip_abs_gap", params.absolute_gap);
      h.setOptionValue("random_seed", static_cast<HighsInt>(params.seed % 2147483647u));
      h.setOptionValue("primal_feasibility_tolerance", params.primal_tolerance);
      h.setOptionValue("mip_feasibility_tolerance", params.integrality_tolerance);
      if (std::isfinite(params.time_limit)) h.setOptionValue("time_limit", params.time_limit);
      if (!presolve) h.setOptionValue("presolve", "off");
    };

    Highs highs;
    configure(highs, true);
    SolveResult r;
    if (highs.passModel(hm) == HighsStatus::kError) {
      r.status = SolveStatus::Error;
      r.message = "HiGHS rejected the model";
      return r;
    }
    if (highs.run() == HighsStatus::kError) {
      r.status = SolveStatus::Error;
      r.message = "HiGHS run failed";
      return r;
    }
    HighsModelStatus ms = highs.getModelStatus();
    if (ms == HighsModelStatus::kUnboundedOrInfeasible) {
      // Presolve can only say "one of the two"; the plain solve disambiguates.
      Highs again;
      configure(again, false);
      again.passModel(hm);
      again.run();
      ms = again.getModelStatus();
      if (ms == HighsModelStatus::kOptimal) return collect(again, model, params, is_mip);
    }
    switch (ms) {
      case HighsModelStatus::kOptimal: return collect(highs, model, params, is_mip);
      case HighsModelStatus::kInfeasible:
        r.status = SolveStatus::Infeasible;
        return r;
      case HighsModelStatus::kUnbounded:
        r.status = SolveStatus::Unbounded;
        return r;
      case HighsModelStatus::kUnboundedOrInfeasible:
        r.status = SolveStatus::Error;
        r.message = "HiGHS could not decide between infeasible and unbounded";
        return r;
      case HighsModelStatus::kTimeLimit:
      case HighsModelStatus::kIterationLimit:
      case HighsModelStatus::kSolutionLimit:
      case HighsModelStatus::kInterrupt:
        r.status = SolveStatus::IterationLimit;
        r.message = "HiGHS: " + highs.modelStatusToString(ms);
        return r;
      default:
        r.status = SolveStatus::Error;
        r.message = "HiGHS: " + highs.modelStatusToString(ms);
        return r;
    }
  }

 private:
  static SolveResult collect(const Highs& h, const ModelBuilder& model, const SolverParams& params,
                             bool is_mip) {
    SolveResult r;
    const auto& info = h.getInfo();
    r.objective = info.objective_function_value;
    r.values = h.getSolution().col_value;
    r.values->resize(model.num_variables());
    if (is_mip) {
      r.dual_bound = info.mip_dual_bound;
      const double abs_gap = std::abs(r.objective - r.dual_bound);
      r.mip_gap = std::isfinite(info.mip_gap) ? info.mip_gap : 0.0;
      const bool closed = abs_gap <= params.absolute_gap || r.mip_gap <= 1e-9;
      r.status = closed ? SolveStatus::Optimal : SolveStatus::GapLimit;
    } else {
      r.dual_bound = r.objective;
      r.status = SolveStatus::Optimal;
    }
    return r;
  }
};

namespace detail {
inline const bool highs_backend_registered = [] {
  register_backend("highs", [] { return std::make_unique<HighsBackend>(); });
  return true;
}();
}  // namespace detail

}  // namespace ruc::milp

#endif  // RUC_MILP_HIGHS_BACKEND_HPP
