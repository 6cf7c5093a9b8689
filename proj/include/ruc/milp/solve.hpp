#ifndef RUC_MILP_SOLVE_HPP
#define RUC_MILP_SOLVE_HPP

// Backend boundary: solver parameters, results, the backend registry and the
// solve() entry point that checks every returned point before handing it out.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ruc/milp/model.hpp"

namespace ruc::milp {

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit, IterationLimit, Error };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::GapLimit: return "GapLimit";
    case SolveStatus::IterationLimit: return "IterationLimit";
    case SolveStatus::Error: return "Error";
  }
  return "Error";
}

/// Absolute tolerance applied by the built-in feasibility checker.
inline constexpr double kFeasibilityTolerance = 1e-6;

struct SolverParams {
  std::string backend = "highs";
  double relative_gap = 1e-3;
  double absolute_gap = 1e-6;
  double time_limit = kInfinity;  ///< seconds
  std::uint32_t seed = 0;
  /// Tolerances handed to the backend; tighter than the checker's on purpose.
  double primal_tolerance = 1e-9;
  double integrality_tolerance = 1e-9;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Error;
  double objective = std::nan("");
  double dual_bound = std::nan("");
  double mip_gap = 0.0;  ///< relative gap achieved, fraction
  std::optional<std::vector<double>> values;
  std::string message;

  [[nodiscard]] bool has_solution() const { return values.has_value(); }
  [[nodiscard]] double value(Var v) const { return values->at(v.index); }
};

class Backend {
 public:
  virtual ~Backend() = default;
  [[nodiscard]] virtual std::string_view name() const = 0;
  /// Raw backend solve; solve() performs status normalization and checking.
  [[nodiscard]] virtual SolveResult run(const ModelBuilder& model, const SolverParams& params) const = 0;
};

using BackendFactory = std::function<std::unique_ptr<Backend>()>;

namespace detail {
inline std::map<std::string, BackendFactory, std::less<>>& backend_registry() {
  static std::map<std::string, BackendFactory, std::less<>> registry;
  return registry;
}
inline std::mutex& backend_registry_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Makes `factory` available under `name` for SolverParams::backend.
inline void register_backend(std::string name, BackendFactory factory) {
  std::lock_guard lock(detail::backend_registry_mutex());
  detail::backend_registry()[std::move(name)] = std::move(factory);
}

inline std::vector<std::string> available_backends() {
  std::lock_guard lock(detail::backend_registry_mutex());
  std::vector<std::string> names;
  for (const auto& [n, f] : detail::backend_registry()) names.push_back(n);
  return names;
}

inline std::unique_ptr<Backend> make_backend(std::string_view name) {
  std::lock_guard lock(detail::backend_registry_mutex());
  const auto& reg = detail::backend_registry();
  const auto it = reg.find(name);
  if (it == reg.end()) return nullptr;
  return it->second();
}

/// Solves `model` with the configured backend.
///
/// Any point returned with Optimal/GapLimit is re-checked against bounds, rows
/// and integrality; a violation above kFeasibilityTolerance becomes Error.
inline SolveResult solve(const ModelBuilder& model, const SolverParams& params = {}) {
  if (!model.has_objective()) {
    return {SolveStatus::Error, std::nan(""), std::nan(""), 0.0, std::nullopt, "model has no objective"};
  }
  if (model.num_variables() == 0) {
    return {SolveStatus::Error, std::nan(""), std::nan(""), 0.0, std::nullopt, "model has no variables"};
  }
  const auto backend = make_backend(params.backend);
  if (!backend) {
    return {SolveStatus::Error, std::nan(""), std::nan(""), 0.0, std::nullopt,
            "solver backend '" + params.backend + "' is not available"};
  }
  SolveResult r = backend->run(model, params);
  const bool with_point = r.status == SolveStatus::Optimal || r.status == SolveStatus::GapLimit;
  if (!with_point) {
    r.values.reset();
    return r;
  }
  if (!r.values || r.values->size() != model.num_variables()) {
    return {SolveStatus::Error, std::nan(""), std::nan(""), 0.0, std::nullopt,
            std::string(backend->name()) + " reported a solution without values"};
  }
  const auto rep = check_feasibility(model, *r.values);
  if (rep.max_violation > kFeasibilityTolerance) {
    return {SolveStatus::Error, r.objective, r.dual_bound, r.mip_gap, std::nullopt,
            std::string(backend->name()) + " returned a point violating '" + rep.worst + "' by " +
                std::to_string(rep.max_violation)};
  }
  return r;
}

}  // namespace ruc::milp

#include "ruc/milp/highs_backend.hpp"

#endif  // RUC_MILP_SOLVE_HPP
