#ifndef RUC_MILP_MODEL_HPP
#define RUC_MILP_MODEL_HPP

// Solver-independent MILP construction: an ordered variable registry, an
// ordered constraint registry and a linear objective.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ruc::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };
enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };

/// Handle to a registered variable.
struct Var {
  std::size_t index = 0;
  friend bool operator==(Var, Var) = default;
};

struct Term {
  Var var;
  double coef = 0.0;
};

class LinearExpr {
 public:
  LinearExpr() = default;
  LinearExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
  LinearExpr(Var v) : terms_{{v, 1.0}} {}               // NOLINT(google-explicit-constructor)

  LinearExpr& add(Var v, double coef) {
    if (coef != 0.0) terms_.push_back({v, coef});
    return *this;
  }
  LinearExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  LinearExpr& operator+=(const LinearExpr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
  }
  LinearExpr& operator-=(const LinearExpr& o) {
    for (const auto& t : o.terms_) terms_.push_back({t.var, -t.coef});
    constant_ -= o.constant_;
    return *this;
  }
  LinearExpr& operator*=(double s) {
    for (auto& t : terms_) t.coef *= s;
    constant_ *= s;
    return *this;
  }

  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
  friend LinearExpr operator-(LinearExpr a) { return a *= -1.0; }
  friend LinearExpr operator*(double s, LinearExpr a) { return a *= s; }
  friend LinearExpr operator*(LinearExpr a, double s) { return a *= s; }

  [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
  [[nodiscard]] double constant() const { return constant_; }

  /// Terms sorted by variable index with duplicates merged and zeros removed.
  [[nodiscard]] std::vector<Term> merged_terms() const {
    std::vector<Term> sorted = terms_;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Term& a, const Term& b) { return a.var.index < b.var.index; });
    std::vector<Term> out;
    for (const auto& t : sorted) {
      if (!out.empty() && out.back().var == t.var) out.back().coef += t.coef;
      else out.push_back(t);
    }
    std::erase_if(out, [](const Term& t) { return t.coef == 0.0; });
    return out;
  }

  [[nodiscard]] double evaluate(std::span<const double> values) const {
    double v = constant_;
    for (const auto& t : terms_) v += t.coef * values[t.var.index];
    return v;
  }

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

inline LinearExpr operator*(double s, Var v) { return LinearExpr{}.add(v, s); }
inline LinearExpr operator*(Var v, double s) { return LinearExpr{}.add(v, s); }
inline LinearExpr operator-(Var v) { return LinearExpr{}.add(v, -1.0); }
inline LinearExpr operator+(Var a, Var b) { return LinearExpr{}.add(a, 1.0).add(b, 1.0); }
inline LinearExpr operator-(Var a, Var b) { return LinearExpr{}.add(a, 1.0).add(b, -1.0); }
inline LinearExpr operator+(Var v, double k) { return LinearExpr{}.add(v, 1.0).add_constant(k); }
inline LinearExpr operator+(double k, Var v) { return LinearExpr{}.add(v, 1.0).add_constant(k); }
inline LinearExpr operator-(Var v, double k) { return LinearExpr{}.add(v, 1.0).add_constant(-k); }
inline LinearExpr operator-(double k, Var v) { return LinearExpr{}.add(v, -1.0).add_constant(k); }

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInfinity;
};

/// sum(terms) <sense> rhs, with terms merged and constants folded into rhs.
struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

class ModelBuilder {
 public:
  explicit ModelBuilder(std::string name = "model") : name_(std::move(name)) {}

  Var add_variable(std::string name, VarKind kind, double lower, double upper) {
    if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
      throw std::invalid_argument("variable '" + name + "': invalid bounds");
    }
    if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0)) {
      throw std::invalid_argument("binary variable '" + name + "': bounds outside [0, 1]");
    }
    const Var v{variables_.size()};
    if (!var_index_.emplace(name, v.index).second) {
      throw std::invalid_argument("duplicate variable name '" + name + "'");
    }
    variables_.push_back({std::move(name), kind, lower, upper});
    return v;
  }
  Var add_continuous(std::string name, double lower = 0.0, double upper = kInfinity) {
    return add_variable(std::move(name), VarKind::Continuous, lower, upper);
  }
  Var add_binary(std::string name) { return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0); }

  void set_bounds(Var v, double lower, double upper) {
    auto& var = variable(v);
    if (lower > upper) throw std::invalid_argument("variable '" + var.name + "': invalid bounds");
    var.lower = lower;
    var.upper = upper;
  }

  /// Registers lhs <sense> rhs. Both sides may carry variables and constants.
  std::size_t add_constraint(std::string name, const LinearExpr& lhs, RowSense sense,
                             const LinearExpr& rhs = LinearExpr{}) {
    const LinearExpr diff = lhs - rhs;
    for (const auto& t : diff.terms()) {
      if (t.var.index >= variables_.size()) {
        throw std::invalid_argument("constraint '" + name + "' references an unknown variable");
      }
    }
    const std::size_t row = constraints_.size();
    if (!row_index_.emplace(name, row).second) {
      throw std::invalid_argument("duplicate constraint name '" + name + "'");
    }
    constraints_.push_back({std::move(name), diff.merged_terms(), sense, -diff.constant()});
    return row;
  }

  void set_objective(ObjectiveSense sense, const LinearExpr& expr) {
    for (const auto& t : expr.terms()) {
      if (t.var.index >= variables_.size()) {
        throw std::invalid_argument("objective references an unknown variable");
      }
    }
    objective_sense_ = sense;
    objective_ = expr.merged_terms();
    objective_constant_ = expr.constant();
    has_objective_ = true;
  }

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const std::vector<Variable>& variables() const { return variables_; }
  [[nodiscard]] const std::vector<Constraint>& constraints() const { return constraints_; }
  [[nodiscard]] const Variable& variable(Var v) const { return variables_.at(v.index); }
  [[nodiscard]] Variable& variable(Var v) { return variables_.at(v.index); }
  [[nodiscard]] std::size_t num_variables() const { return variables_.size(); }
  [[nodiscard]] std::size_t num_constraints() const { return constraints_.size(); }

  [[nodiscard]] bool has_objective() const { return has_objective_; }
  [[nodiscard]] ObjectiveSense objective_sense() const { return objective_sense_; }
  [[nodiscard]] const std::vector<Term>& objective_terms() const { return objective_; }
  [[nodiscard]] double objective_constant() const { return objective_constant_; }

  [[nodiscard]] std::optional<Var> find_variable(std::string_view name) const {
    const auto it = var_index_.find(std::string(name));
    if (it == var_index_.end()) return std::nullopt;
    return Var{it->second};
  }
  [[nodiscard]] std::optional<std::size_t> find_constraint(std::string_view name) const {
    const auto it = row_index_.find(std::string(name));
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] double row_activity(std::size_t row, std::span<const double> values) const {
    double a = 0.0;
    for (const auto& t : constraints_[row].terms) a += t.coef * values[t.var.index];
    return a;
  }

  [[nodiscard]] double objective_value(std::span<const double> values) const {
    double v = objective_constant_;
    for (const auto& t : objective_) v += t.coef * values[t.var.index];
    return v;
  }

 private:
  std::string name_;
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::unordered_map<std::string, std::size_t> var_index_;
  std::unordered_map<std::string, std::size_t> row_index_;
  ObjectiveSense objective_sense_ = ObjectiveSense::Minimize;
  std::vector<Term> objective_;
  double objective_constant_ = 0.0;
  bool has_objective_ = false;
};

/// Largest violation of a point against bounds, rows and integrality.
struct FeasibilityReport {
  double max_violation = 0.0;
  std::string worst;  ///< name of the worst bound/row/variable, empty when feasible
};

inline FeasibilityReport check_feasibility(const ModelBuilder& model,
                                           std::span<const double> values) {
  FeasibilityReport rep;
  auto note = [&](double viol, const std::string& what) {
    if (viol > rep.max_violation) {
      rep.max_violation = viol;
      rep.worst = what;
    }
  };
  const auto& vars = model.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double x = values[j];
    if (!std::isfinite(x)) {
      note(kInfinity, "variable " + vars[j].name + " (non-finite)");
      continue;
    }
    note(vars[j].lower - x, "bound " + vars[j].name);
    note(x - vars[j].upper, "bound " + vars[j].name);
    if (vars[j].kind == VarKind::Binary) {
      note(std::min(std::abs(x), std::abs(x - 1.0)), "integrality " + vars[j].name);
    }
  }
  const auto& rows = model.constraints();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double a = model.row_activity(i, values);
    switch (rows[i].sense) {
      case RowSense::LessEqual: note(a - rows[i].rhs, rows[i].name); break;
      case RowSense::GreaterEqual: note(rows[i].rhs - a, rows[i].name); break;
      case RowSense::Equal: note(std::abs(a - rows[i].rhs), rows[i].name); break;
    }
  }
  return rep;
}

}  // namespace ruc::milp

#endif  // RUC_MILP_MODEL_HPP
