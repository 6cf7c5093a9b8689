#ifndef RUC_CASE_IO_HPP
#define RUC_CASE_IO_HPP

// JSON case files (with optional CSV profiles) and solution files.
//
// Case layout:
//   name                 string, optional
//   system.buses         [int]; system.reference_bus int
//   system.generators    [{id, bus, p_min, p_max, ramp_up, ramp_down, min_on, min_off,
//                          startup_cost, no_load_cost, cost_a, cost_b,
//                          initial: {on, hours, p0}}]
//   system.lines         [{id, from, to, reactance, capacity}]
//   system.wind_farms    [{id, bus, capacity}]
//   system.loads         [{id, bus}]
//   profiles.horizon     int
//   profiles.load        {id: [MW]}  or profiles.load_csv: path
//   profiles.wind        {id: [MW]}  or profiles.wind_csv: path
//   profiles.price_coefficient  {id: [$/MWh] | number}, optional
//   uncertainty          {gamma_t, gamma_s, band_confidence?, sigma_base: {id: number},
//                         sigma_scaling?: "forecast"|"capacity", beta_t?, beta_s?,
//                         bands?: {id: {upper: [MW], lower: [MW]}}}
//   options              free-form run defaults, read by the CLI
// CSV profiles have a header "period,<id>,..." and exactly one row per period.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ruc/ccg.hpp"
#include "ruc/errors.hpp"
#include "ruc/master_problem.hpp"
#include "ruc/system_model.hpp"

namespace ruc {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw InputError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw InputError(path + "/" + key + ": missing required key '" + key + "'");
  return *it;
}

template <class T>
T as(const Json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(path + ": wrong type (got " + std::string(j.type_name()) + ")");
  }
}

template <class T>
T field(const Json& obj, const std::string& key, const std::string& path) {
  return as<T>(require(obj, key, path), path + "/" + key);
}

template <class T>
T field_or(const Json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  return as<T>(obj.at(key), path + "/" + key);
}

inline std::vector<double> number_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw InputError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(path + "/" + std::to_string(i) + ": expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

/// Columns of a "period,<id>,..." CSV, keyed by id.
inline std::map<std::string, std::vector<double>> read_profile_csv(const std::filesystem::path& file, int horizon) {
  std::ifstream in(file);
  if (!in) throw InputError(file.string() + ": cannot open profile");
  std::string line;
  if (!std::getline(in, line)) throw InputError(file.string() + ": empty profile");
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw InputError(file.string() + ": header needs 'period' and at least one id");
  std::map<std::string, std::vector<double>> cols;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    ++rows;
    if (cells.size() != header.size()) {
      throw InputError(file.string() + ": row " + std::to_string(rows) + " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(header.size()));
    }
    for (std::size_t k = 1; k < cells.size(); ++k) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[k], &used);
        if (used != cells[k].size()) throw std::invalid_argument("trailing");
        cols[header[k]].push_back(v);
      } catch (const std::exception&) {
        throw InputError(file.string() + ": row " + std::to_string(rows) + ", column '" + header[k] +
                         "': not a number");
      }
    }
  }
  if (rows != horizon) {
    throw InputError(file.string() + ": has " + std::to_string(rows) + " rows, expected " +
                     std::to_string(horizon) + " (one per period)");
  }
  return cols;
}

/// Per-device profile from an inline map or a CSV file.
inline std::map<std::string, std::vector<double>> read_profiles(const Json& profiles, const std::string& key,
                                                                const std::filesystem::path& base, int horizon) {
  std::map<std::string, std::vector<double>> out;
  const std::string csv_key = key + "_csv";
  if (profiles.contains(csv_key)) {
    const auto rel = field<std::string>(profiles, csv_key, "/profiles");
    return read_profile_csv(base / rel, horizon);
  }
  if (!profiles.contains(key)) return out;
  const auto& m = profiles.at(key);
  if (!m.is_object()) throw InputError("/profiles/" + key + ": expected an object keyed by device id");
  for (const auto& [id, arr] : m.items()) out[id] = number_array(arr, "/profiles/" + key + "/" + id);
  return out;
}

inline void throw_on_errors(const std::vector<Diagnostic>& diags) {
  std::string msg;
  for (const auto& d : diags) {
    if (d.severity != Severity::Error) continue;
    msg += (msg.empty() ? "" : "\n") + d.path + ": " + d.message;
  }
  if (!msg.empty()) throw InputError(msg);
}

}  // namespace detail

struct CaseFile {
  SystemCase system;
  Json options = Json::object();
  std::vector<Diagnostic> warnings;
};

/// Parses, validates and prepares (PTDF, bands) a case document. `base` resolves CSV paths.
inline CaseFile parse_case(const Json& doc, const std::filesystem::path& base = {}) {
  using detail::field;
  using detail::field_or;
  CaseFile out;
  SystemCase& c = out.system;
  c.name = field_or<std::string>(doc, "name", "", "case");

  const auto& sys = detail::require(doc, "system", "");
  c.network.buses = field<std::vector<int>>(sys, "buses", "/system");
  c.network.reference_bus = field<int>(sys, "reference_bus", "/system");

  const auto& gens = detail::require(sys, "generators", "/system");
  if (!gens.is_array()) throw InputError("/system/generators: expected an array");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string p = "/system/generators/" + std::to_string(i);
    const auto& j = gens[i];
    Generator g;
    g.id = field<std::string>(j, "id", p);
    g.bus = field<int>(j, "bus", p);
    g.p_min = field<double>(j, "p_min", p);
    g.p_max = field<double>(j, "p_max", p);
    g.ramp_up = field<double>(j, "ramp_up", p);
    g.ramp_down = field<double>(j, "ramp_down", p);
    g.min_on = field_or<int>(j, "min_on", p, 1);
    g.min_off = field_or<int>(j, "min_off", p, 1);
    g.startup_cost = field_or<double>(j, "startup_cost", p, 0.0);
    g.no_load_cost = field_or<double>(j, "no_load_cost", p, 0.0);
    g.cost.a = field_or<double>(j, "cost_a", p, 0.0);
    g.cost.b = field_or<double>(j, "cost_b", p, 0.0);
    const auto& init = detail::require(j, "initial", p);
    g.initial.on = field<bool>(init, "on", p + "/initial");
    g.initial.hours = field_or<int>(init, "hours", p + "/initial", 1);
    g.initial.p0 = field_or<double>(init, "p0", p + "/initial", 0.0);
    c.generators.push_back(std::move(g));
  }

  if (sys.contains("lines")) {
    const auto& lines = sys.at("lines");
    if (!lines.is_array()) throw InputError("/system/lines: expected an array");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string p = "/system/lines/" + std::to_string(i);
      const auto& j = lines[i];
      c.network.lines.push_back({field<std::string>(j, "id", p), field<int>(j, "from", p), field<int>(j, "to", p),
                                 field<double>(j, "reactance", p), field<double>(j, "capacity", p)});
    }
  }

  const auto& prof = detail::require(doc, "profiles", "");
  c.horizon = field<int>(prof, "horizon", "/profiles");
  if (c.horizon < 1) throw InputError("/profiles/horizon: must be at least 1");
  const auto load_profiles = detail::read_profiles(prof, "load", base, c.horizon);
  const auto wind_profiles = detail::read_profiles(prof, "wind", base, c.horizon);

  const auto& loads = detail::require(sys, "loads", "/system");
  if (!loads.is_array()) throw InputError("/system/loads: expected an array");
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const std::string p = "/system/loads/" + std::to_string(i);
    Load l;
    l.id = field<std::string>(loads[i], "id", p);
    l.bus = field<int>(loads[i], "bus", p);
    const auto it = load_profiles.find(l.id);
    if (it == load_profiles.end()) throw InputError("/profiles/load/" + l.id + ": missing demand profile");
    l.demand = it->second;
    c.loads.push_back(std::move(l));
  }

  const auto& unc = detail::require(doc, "uncertainty", "");
  c.uncertainty.gamma_t = field<int>(unc, "gamma_t", "/uncertainty");
  c.uncertainty.gamma_s = field<int>(unc, "gamma_s", "/uncertainty");
  c.uncertainty.band_confidence = field_or<double>(unc, "band_confidence", "/uncertainty", 0.99);
  const auto scaling = field_or<std::string>(unc, "sigma_scaling", "/uncertainty", "forecast");
  if (scaling == "forecast") c.uncertainty.sigma_scaling = SigmaScaling::Forecast;
  else if (scaling == "capacity") c.uncertainty.sigma_scaling = SigmaScaling::Capacity;
  else throw InputError("/uncertainty/sigma_scaling: expected 'forecast' or 'capacity'");
  if (unc.contains("beta_t")) c.uncertainty.beta_t = field<double>(unc, "beta_t", "/uncertainty");
  if (unc.contains("beta_s")) c.uncertainty.beta_s = field<double>(unc, "beta_s", "/uncertainty");

  if (sys.contains("wind_farms")) {
    const auto& farms = sys.at("wind_farms");
    if (!farms.is_array()) throw InputError("/system/wind_farms: expected an array");
    for (std::size_t i = 0; i < farms.size(); ++i) {
      const std::string p = "/system/wind_farms/" + std::to_string(i);
      WindFarm w;
      w.id = field<std::string>(farms[i], "id", p);
      w.bus = field<int>(farms[i], "bus", p);
      w.capacity = field<double>(farms[i], "capacity", p);
      const auto it = wind_profiles.find(w.id);
      if (it == wind_profiles.end()) throw InputError("/profiles/wind/" + w.id + ": missing forecast profile");
      w.forecast = it->second;
      if (unc.contains("sigma_base")) {
        const auto& sb = unc.at("sigma_base");
        if (sb.is_number()) w.sigma_base = sb.get<double>();
        else if (sb.is_object() && sb.contains(w.id)) w.sigma_base = detail::as<double>(sb.at(w.id), "/uncertainty/sigma_base/" + w.id);
        else if (!unc.contains("bands") || !unc.at("bands").contains(w.id))
          throw InputError("/uncertainty/sigma_base/" + w.id + ": missing for wind farm '" + w.id + "'");
      }
      if (prof.contains("price_coefficient") && prof.at("price_coefficient").contains(w.id)) {
        const auto& pc = prof.at("price_coefficient").at(w.id);
        const std::string pp = "/profiles/price_coefficient/" + w.id;
        if (pc.is_number()) w.price_coefficient.assign(static_cast<std::size_t>(c.horizon), pc.get<double>());
        else w.price_coefficient = detail::number_array(pc, pp);
      }
      if (unc.contains("bands") && unc.at("bands").contains(w.id)) {
        const auto& b = unc.at("bands").at(w.id);
        const std::string bp = "/uncertainty/bands/" + w.id;
        w.band_override = BandOverride{detail::number_array(detail::require(b, "upper", bp), bp + "/upper"),
                                       detail::number_array(detail::require(b, "lower", bp), bp + "/lower")};
      }
      c.wind_farms.push_back(std::move(w));
    }
  }
  if (doc.contains("options")) out.options = doc.at("options");

  auto diags = validate_case(c);
  detail::throw_on_errors(diags);
  out.warnings = std::move(diags);
  c.network.ptdf = compute_ptdf(c.network);
  rebuild_bands(c);
  return out;
}

inline CaseFile load_case_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open case file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return parse_case(doc, path.parent_path());
}

/// Validated case with PTDF and uncertainty bands built.
inline SystemCase load_case(const std::filesystem::path& path) { return load_case_file(path).system; }

/// Case with every farm's forecast, capacity and explicit band scaled by `multiplier`.
inline SystemCase scale_penetration(const SystemCase& base, double multiplier) {
  if (!(multiplier > 0.0)) throw InputError("penetration multiplier must be positive");
  SystemCase c = base;
  for (auto& w : c.wind_farms) {
    w.capacity *= multiplier;
    for (auto& x : w.forecast) x *= multiplier;
    if (w.band_override) {
      for (auto& x : w.band_override->upper) x *= multiplier;
      for (auto& x : w.band_override->lower) x *= multiplier;
    }
  }
  rebuild_bands(c);
  return c;
}

// ---------------------------------------------------------------------------
// Solutions

inline Json realization_json(const SystemCase& c, const UncertaintyRealization& v) {
  Json out = Json::array();
  for (int m = 0; m < v.farms; ++m) {
    for (int t = 0; t < v.periods; ++t) {
      if (!v.up_at(m, t) && !v.down_at(m, t)) continue;
      out.push_back({{"farm", c.wind_farms[static_cast<std::size_t>(m)].id},
                     {"period", t + 1},
                     {"edge", v.up_at(m, t) ? "upper" : "lower"}});
    }
  }
  return out;
}

inline Json cost_json(const CostBreakdown& k) {
  return {{"total", k.total()}, {"uc", k.uc()}, {"ed", k.ed()},
          {"startup", k.startup}, {"no_load", k.no_load}, {"energy", k.energy}};
}

inline Json first_stage_json(const SystemCase& c, const FirstStageDecision& d) {
  Json gens = Json::array();
  for (int g = 0; g < d.generators; ++g) {
    Json u = Json::array(), z = Json::array(), p = Json::array();
    for (int t = 0; t < d.periods; ++t) {
      u.push_back(d.on(g, t) ? 1 : 0);
      z.push_back(d.started(g, t) ? 1 : 0);
      p.push_back(d.dispatch(g, t));
    }
    gens.push_back({{"id", c.generators[static_cast<std::size_t>(g)].id}, {"u", u}, {"z", z}, {"p_hat", p}});
  }
  Json farms = Json::array();
  for (int m = 0; m < d.farms; ++m) {
    Json a = Json::array();
    for (int t = 0; t < d.periods; ++t) a.push_back(d.ratio(m, t));
    farms.push_back({{"id", c.wind_farms[static_cast<std::size_t>(m)].id}, {"alpha", a}});
  }
  return {{"generators", gens}, {"wind_farms", farms}};
}

/// One iteration as a log record. Timings are included only when asked for.
inline Json iteration_json(const SystemCase& c, const IterationRecord& r, bool with_timing) {
  Json j = {{"k", r.k},
            {"master_status", std::string(milp::to_string(r.master_status))},
            {"master_objective", std::isfinite(r.master_objective) ? Json(r.master_objective) : Json(nullptr)},
            {"master_bound", std::isfinite(r.master_bound) ? Json(r.master_bound) : Json(nullptr)},
            {"R", std::isfinite(r.R) ? Json(r.R) : Json(nullptr)},
            {"v", r.v ? realization_json(c, *r.v) : Json(nullptr)},
            {"big_m", r.big_m}};
  if (with_timing) {
    j["master_seconds"] = r.master_seconds;
    j["subproblem_seconds"] = r.subproblem_seconds;
  }
  return j;
}

/// Solution document; contains no timings, so equal runs give equal bytes.
inline Json solution_json(const SystemCase& c, const RucSolution& s) {
  Json j;
  j["case"] = c.name;
  j["mode"] = std::string(to_string(s.mode));
  j["status"] = std::string(to_string(s.status));
  j["converged"] = s.converged();
  j["message"] = s.message;
  j["epsilon_feas"] = s.epsilon_feas;
  j["final_R"] = std::isfinite(s.final_R) ? Json(s.final_R) : Json(nullptr);
  j["iterations"] = Json::array();
  for (const auto& r : s.iterations) j["iterations"].push_back(iteration_json(c, r, false));
  if (s.decision) {
    j["cost"] = cost_json(s.decision->cost);
    j["first_stage"] = first_stage_json(c, *s.decision);
  } else {
    j["cost"] = nullptr;
    j["first_stage"] = nullptr;
  }
  if (s.certificate) {
    j["certificate"] = {{"method", s.certificate->method}, {"R", s.certificate->R},
                        {"robust", s.certificate->robust}, {"vectors", s.certificate->vectors}};
  }
  return j;
}

/// First-stage decision stored in a solution document, checked against the case.
inline FirstStageDecision read_first_stage(const Json& doc, const SystemCase& c) {
  const auto& fs = detail::require(doc, "first_stage", "");
  if (fs.is_null()) throw InputError("/first_stage: solution carries no first-stage decision");
  FirstStageDecision d;
  d.generators = c.num_generators();
  d.farms = c.num_farms();
  d.periods = c.horizon;
  const auto T = static_cast<std::size_t>(c.horizon);
  const auto& gens = detail::require(fs, "generators", "/first_stage");
  if (!gens.is_array() || gens.size() != c.generators.size()) {
    throw InputError("/first_stage/generators: expected " + std::to_string(c.generators.size()) + " entries");
  }
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const std::string p = "/first_stage/generators/" + std::to_string(g);
    if (detail::field<std::string>(gens[g], "id", p) != c.generators[g].id) {
      throw InputError(p + "/id: expected '" + c.generators[g].id + "'");
    }
    const auto u = detail::number_array(detail::require(gens[g], "u", p), p + "/u");
    const auto z = detail::number_array(detail::require(gens[g], "z", p), p + "/z");
    const auto ph = detail::number_array(detail::require(gens[g], "p_hat", p), p + "/p_hat");
    if (u.size() != T || z.size() != T || ph.size() != T) throw InputError(p + ": arrays must have one entry per period");
    for (std::size_t t = 0; t < T; ++t) {
      d.u.push_back(u[t] > 0.5 ? 1 : 0);
      d.z.push_back(z[t] > 0.5 ? 1 : 0);
      d.p_hat.push_back(ph[t]);
    }
  }
  const auto& farms = detail::require(fs, "wind_farms", "/first_stage");
  if (!farms.is_array() || farms.size() != c.wind_farms.size()) {
    throw InputError("/first_stage/wind_farms: expected " + std::to_string(c.wind_farms.size()) + " entries");
  }
  for (std::size_t m = 0; m < farms.size(); ++m) {
    const std::string p = "/first_stage/wind_farms/" + std::to_string(m);
    if (detail::field<std::string>(farms[m], "id", p) != c.wind_farms[m].id) {
      throw InputError(p + "/id: expected '" + c.wind_farms[m].id + "'");
    }
    const auto a = detail::number_array(detail::require(farms[m], "alpha", p), p + "/alpha");
    if (a.size() != T) throw InputError(p + "/alpha: expected one entry per period");
    for (double x : a) {
      if (!(x >= 0.0 && x <= 1.0)) throw InputError(p + "/alpha: ratios must lie in [0, 1]");
      d.alpha.push_back(x);
    }
  }
  if (doc.contains("cost") && doc.at("cost").is_object()) {
    const auto& k = doc.at("cost");
    d.cost.startup = detail::field_or<double>(k, "startup", "/cost", 0.0);
    d.cost.no_load = detail::field_or<double>(k, "no_load", "/cost", 0.0);
    d.cost.energy = detail::field_or<double>(k, "energy", "/cost", 0.0);
  }
  return d;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write");
  out << text;
}

}  // namespace ruc

#endif  // RUC_CASE_IO_HPP
