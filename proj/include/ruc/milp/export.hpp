#ifndef RUC_MILP_EXPORT_HPP
#define RUC_MILP_EXPORT_HPP

// LP-file and MPS writers. Output order is registry order, so exporting the
// same model twice gives byte-identical text.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "ruc/milp/model.hpp"

namespace ruc::milp {

enum class ExportFormat { LpText, Mps };

namespace detail {

inline std::string format_number(double x) {
  if (x == 0.0) return "0";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return {buf.data(), res.ptr};
}

/// LP-format identifier: brackets become parentheses, other reserved symbols
/// become underscores. Names a reader could take for a number, a keyword or an
/// infinity get a leading underscore.
inline std::string lp_name(std::string_view name) {
  std::string out;
  out.reserve(name.size() + 1);
  for (char ch : name) {
    switch (ch) {
      case '[': out.push_back('('); break;
      case ']': out.push_back(')'); break;
      case ':': case ' ': case '+': case '-': case '*': case '^': case '<': case '>': case '=':
      case '\t': case '\\':
        out.push_back('_');
        break;
      default: out.push_back(ch);
    }
  }
  static constexpr std::array<std::string_view, 18> reserved{
      "free", "sos", "st", "s.t.", "end", "bounds", "bound", "bin", "binary", "binaries",
      "gen", "general", "generals", "int", "integer", "semi", "semis", "subject"};
  std::string lower(out.size(), ' ');
  std::transform(out.begin(), out.end(), lower.begin(),
                 [](char ch) { return static_cast<char>(std::tolower(static_cast<unsigned char>(ch))); });
  const bool exponent_like = (lower.size() == 1 && lower[0] == 'e') ||
                             (lower.size() > 1 && lower[0] == 'e' &&
                              (std::isdigit(static_cast<unsigned char>(lower[1])) || lower[1] == '.'));
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.' ||
      exponent_like || lower.rfind("inf", 0) == 0 || std::find(reserved.begin(), reserved.end(), lower) != reserved.end()) {
    out.insert(out.begin(), '_');
  }
  return out;
}

inline std::string mps_name(std::string_view name) {
  std::string out(name);
  for (char& ch : out) {
    if (ch == ' ' || ch == '\t') ch = '_';
  }
  return out;
}

inline void append_lp_terms(std::string& out, const std::vector<Term>& terms,
                            const std::vector<Variable>& vars) {
  bool first = true;
  for (const auto& t : terms) {
    const double c = t.coef;
    if (!first) out += c < 0 ? " - " : " + ";
    else if (c < 0) out += "-";
    const double mag = std::abs(c);
    if (mag != 1.0) out += format_number(mag) + " ";
    out += lp_name(vars[t.var.index].name);
    first = false;
  }
}

inline std::string to_lp(const ModelBuilder& m) {
  const auto& vars = m.variables();
  std::string out = "\\ Model " + m.name() + "\n";
  out += m.objective_sense() == ObjectiveSense::Maximize ? "Maximize\n" : "Minimize\n";
  out += " obj:";
  if (!m.objective_terms().empty()) {
    out += " ";
    append_lp_terms(out, m.objective_terms(), vars);
  } else if (!vars.empty()) {
    out += " 0 " + lp_name(vars.front().name);
  }
  if (m.objective_constant() != 0.0) {
    const double k = m.objective_constant();
    out += (k < 0 ? " - " : " + ") + format_number(std::abs(k));
  }
  out += "\n";
  if (!m.constraints().empty()) {
    out += "Subject To\n";
    for (const auto& r : m.constraints()) {
      out += " " + lp_name(r.name) + ":";
      if (r.terms.empty()) {
        out += vars.empty() ? " 0" : " 0 " + lp_name(vars.front().name);
      } else {
        out += " ";
        append_lp_terms(out, r.terms, vars);
      }
      switch (r.sense) {
        case RowSense::LessEqual: out += " <= "; break;
        case RowSense::GreaterEqual: out += " >= "; break;
        case RowSense::Equal: out += " = "; break;
      }
      out += format_number(r.rhs) + "\n";
    }
  }
  out += "Bounds\n";
  for (const auto& v : vars) {
    const std::string n = lp_name(v.name);
    if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (v.lower == v.upper) {
      out += " " + n + " = " + format_number(v.lower) + "\n";
    } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out += " " + n + " free\n";
    } else {
      out += " ";
      out += std::isinf(v.lower) ? "-inf" : format_number(v.lower);
      out += " <= " + n + " <= ";
      out += std::isinf(v.upper) ? "+inf" : format_number(v.upper);
      out += "\n";
    }
  }
  bool any_binary = false;
  for (const auto& v : vars) {
    if (v.kind != VarKind::Binary) continue;
    if (!any_binary) out += "Binaries\n";
    any_binary = true;
    out += " " + lp_name(v.name) + "\n";
  }
  out += "End\n";
  return out;
}

inline std::string to_mps(const ModelBuilder& m) {
  const auto& vars = m.variables();
  const auto& rows = m.constraints();
  std::string out = "NAME " + mps_name(m.name()) + "\n";
  if (m.objective_sense() == ObjectiveSense::Maximize) out += "OBJSENSE\n    MAX\n";
  out += "ROWS\n N  obj\n";
  for (const auto& r : rows) {
    const char* s = r.sense == RowSense::LessEqual ? " L  " : r.sense == RowSense::Equal ? " E  " : " G  ";
    out += s + mps_name(r.name) + "\n";
  }

  // Column-major coefficient lists in registry order.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(vars.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& t : rows[i].terms) cols[t.var.index].emplace_back(i, t.coef);
  }
  std::vector<double> obj(vars.size(), 0.0);
  for (const auto& t : m.objective_terms()) obj[t.var.index] = t.coef;

  out += "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const bool is_int = vars[j].kind == VarKind::Binary;
    if (is_int != in_int) {
      out += "    MARKER" + std::to_string(marker++) + " 'MARKER' " + (is_int ? "'INTORG'" : "'INTEND'") + "\n";
      in_int = is_int;
    }
    const std::string n = mps_name(vars[j].name);
    if (obj[j] != 0.0 || cols[j].empty()) out += "    " + n + " obj " + format_number(obj[j]) + "\n";
    for (const auto& [i, c] : cols[j]) {
      out += "    " + n + " " + mps_name(rows[i].name) + " " + format_number(c) + "\n";
    }
  }
  if (in_int) out += "    MARKER" + std::to_string(marker++) + " 'MARKER' 'INTEND'\n";

  out += "RHS\n";
  if (m.objective_constant() != 0.0) {
    out += "    RHS obj " + format_number(-m.objective_constant()) + "\n";
  }
  for (const auto& r : rows) {
    if (r.rhs != 0.0) out += "    RHS " + mps_name(r.name) + " " + format_number(r.rhs) + "\n";
  }

  out += "BOUNDS\n";
  for (const auto& v : vars) {
    const std::string n = mps_name(v.name);
    if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) {
      out += " BV BND " + n + "\n";
      continue;
    }
    if (v.lower == v.upper) {
      out += " FX BND " + n + " " + format_number(v.lower) + "\n";
      continue;
    }
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out += " FR BND " + n + "\n";
      continue;
    }
    if (std::isinf(v.lower)) out += " MI BND " + n + "\n";
    else if (v.lower != 0.0 || v.kind == VarKind::Binary) out += " LO BND " + n + " " + format_number(v.lower) + "\n";
    if (!std::isinf(v.upper)) out += " UP BND " + n + " " + format_number(v.upper) + "\n";
    else if (v.kind == VarKind::Binary) out += " PL BND " + n + "\n";
  }
  out += "ENDATA\n";
  return out;
}

}  // namespace detail

/// Text of `model` in CPLEX LP format or free MPS.
inline std::string export_model(const ModelBuilder& model, ExportFormat format) {
  return format == ExportFormat::LpText ? detail::to_lp(model) : detail::to_mps(model);
}

}  // namespace ruc::milp

#endif  // RUC_MILP_EXPORT_HPP
