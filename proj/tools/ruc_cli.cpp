// ruc: robust unit commitment with strategic wind curtailment.
//
// Exit codes: 0 success, 1 stopped without convergence (iteration limit or
// plateau), 2 robust-infeasible, 3 input error, 4 solver error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ruc/ruc.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kNotConverged = 1, kRobustInfeasible = 2, kInputError = 3, kSolverError = 4 };

int exit_code(ruc::RucStatus s) {
  switch (s) {
    case ruc::RucStatus::Converged: return kOk;
    case ruc::RucStatus::RobustInfeasible: return kRobustInfeasible;
    case ruc::RucStatus::IterationLimit:
    case ruc::RucStatus::Plateau: return kNotConverged;
    case ruc::RucStatus::Error: return kSolverError;
  }
  return kSolverError;
}

/// Flags shared by solve, study and export. Unset flags fall back to the case's options block.
struct RunFlags {
  std::optional<std::string> mode;
  std::optional<int> gamma_t, gamma_s, max_iter, segments;
  std::optional<double> epsilon_feas, big_m, gap, time_limit;
  std::optional<std::string> solver;
  std::optional<std::uint32_t> seed;
  bool delta_r_stop = false;
  bool no_polish = false;

  void attach(CLI::App* app) {
    app->add_option("--mode", mode, "wgc or traditional")->check(CLI::IsMember({"wgc", "traditional"}));
    app->add_option("--gamma-t", gamma_t, "deviations allowed per farm over the horizon")->check(CLI::NonNegativeNumber);
    app->add_option("--gamma-s", gamma_s, "deviations allowed per period over all farms")->check(CLI::NonNegativeNumber);
    app->add_option("--epsilon-feas", epsilon_feas, "worst-case slack accepted as robust, MW")->check(CLI::NonNegativeNumber);
    app->add_option("--max-iter", max_iter, "iteration cap")->check(CLI::PositiveNumber);
    app->add_option("--segments", segments, "piecewise-linear cost segments")->check(CLI::PositiveNumber);
    app->add_option("--big-m", big_m, "initial bound on subproblem multipliers")->check(CLI::PositiveNumber);
    app->add_option("--solver", solver, "MILP backend");
    app->add_option("--gap", gap, "relative MIP gap")->check(CLI::NonNegativeNumber);
    app->add_option("--time-limit", time_limit, "per-solve time limit, seconds")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "backend random seed");
    app->add_flag("--delta-r-stop", delta_r_stop, "also stop when consecutive worst-case slacks agree");
    app->add_flag("--no-alpha-polish", no_polish, "keep the backend's alpha among cost-optimal masters");
  }
};

template <class T>
std::optional<T> option_value(const ruc::Json& opts, const char* key) {
  if (!opts.is_object() || !opts.contains(key)) return std::nullopt;
  try {
    return opts.at(key).get<T>();
  } catch (const std::exception&) {
    throw ruc::InputError(std::string("/options/") + key + ": wrong type");
  }
}

template <class T>
void pick(T& target, const std::optional<T>& flag, const std::optional<T>& file) {
  if (flag) target = *flag;
  else if (file) target = *file;
}

ruc::RucOptions resolve_options(const RunFlags& f, ruc::CaseFile& cf) {
  const ruc::Json& opts = cf.options;
  ruc::Json solver = opts.is_object() && opts.contains("solver") && opts.at("solver").is_object() ? opts.at("solver")
                                                                                                  : ruc::Json::object();
  ruc::RucOptions r;
  std::string mode = "wgc";
  pick(mode, f.mode, option_value<std::string>(opts, "mode"));
  r.mode = ruc::parse_mode(mode);
  pick(r.epsilon_feas, f.epsilon_feas, option_value<double>(opts, "epsilon_feas"));
  pick(r.max_iter, f.max_iter, option_value<int>(opts, "max_iter"));
  pick(r.master.segments, f.segments, option_value<int>(opts, "segments"));
  pick(r.subproblem.big_m, f.big_m, option_value<double>(opts, "big_m"));
  std::optional<std::string> backend = option_value<std::string>(solver, "backend");
  if (!backend) backend = option_value<std::string>(opts, "solver");
  pick(r.solver.backend, f.solver, backend);
  pick(r.solver.relative_gap, f.gap, option_value<double>(solver, "relative_gap"));
  pick(r.solver.time_limit, f.time_limit, option_value<double>(solver, "time_limit"));
  pick(r.solver.seed, f.seed, option_value<std::uint32_t>(solver, "seed"));
  r.delta_r_stop = f.delta_r_stop;
  if (f.no_polish) r.tie_break = ruc::AlphaTieBreak::None;
  if (f.gamma_t) cf.system.uncertainty.gamma_t = *f.gamma_t;
  if (f.gamma_s) cf.system.uncertainty.gamma_s = *f.gamma_s;
  if (r.max_iter < 1) throw ruc::InputError("/options/max_iter: must be at least 1");
  if (r.master.segments < 1) throw ruc::InputError("/options/segments: must be at least 1");
  return r;
}

struct LogSink {
  std::ofstream file;
  std::ostream* out = &std::cout;

  explicit LogSink(const std::string& path) {
    if (path.empty()) return;
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    file.open(path);
    if (!file) throw ruc::InputError(path + ": cannot write log");
    out = &file;
  }
  void write(const ruc::Json& j) {
    *out << j.dump() << '\n';
    out->flush();
  }
};

void warn(const std::vector<ruc::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << "warning: " << d.path << ": " << d.message << '\n';
}

/// Deterministic per-run tables for one solved case.
void write_run_outputs(const fs::path& dir, const ruc::SystemCase& c, const ruc::RucSolution& s, double multiplier) {
  auto doc = ruc::solution_json(c, s);
  doc["penetration"] = multiplier;
  ruc::write_text_file(dir / "solution.json", doc.dump(2) + "\n");
  const std::vector<ruc::CostRow> rows{ruc::cost_row(s.mode, multiplier, s)};
  ruc::write_text_file(dir / "cost_table.csv", ruc::cost_table_csv(rows));
  ruc::write_text_file(dir / "cost_table.txt", ruc::cost_table_text(rows));
  std::string iters = "k,master_status,master_objective,master_bound,R\n";
  for (const auto& it : s.iterations) {
    iters += std::to_string(it.k) + "," + std::string(ruc::milp::to_string(it.master_status)) + "," +
             ruc::detail::fmt(it.master_objective, 4) + "," + ruc::detail::fmt(it.master_bound, 4) + "," +
             ruc::detail::fmt(it.R, 9) + "\n";
  }
  ruc::write_text_file(dir / "iterations.csv", iters);
  if (!s.decision) return;
  const std::string prefix = ruc::detail::pct(multiplier) + "," + std::string(ruc::to_string(s.mode)) + ",";
  ruc::write_text_file(dir / "wind_series.csv", ruc::kSeriesHeader + ruc::series_rows(prefix, *s.decision, c));
  ruc::write_text_file(dir / "wind_benefit.csv",
                       "penetration_pct,mode,farm,Q\n" + ruc::wind_benefit_rows(prefix, *s.decision, c));
  ruc::write_text_file(dir / "ramp_capability.csv",
                       "penetration_pct,mode,avg_delta_up,avg_delta_down,avg_headroom_up,avg_headroom_down\n" +
                           ruc::ramp_summary_row(prefix, *s.decision, c));
  std::string dispatch = "generator,period,u,z,p_hat\n";
  for (int g = 0; g < s.decision->generators; ++g) {
    for (int t = 0; t < s.decision->periods; ++t) {
      dispatch += c.generators[static_cast<std::size_t>(g)].id + "," + std::to_string(t + 1) + "," +
                  (s.decision->on(g, t) ? "1" : "0") + "," + (s.decision->started(g, t) ? "1" : "0") + "," +
                  ruc::detail::fmt(s.decision->dispatch(g, t), 6) + "\n";
    }
  }
  ruc::write_text_file(dir / "first_stage.csv", dispatch);
}

int cmd_solve(const std::string& case_path, RunFlags& flags, const std::string& out_dir, const std::string& log_file,
              const std::string& certify_method) {
  auto cf = ruc::load_case_file(case_path);
  warn(cf.warnings);
  const auto opts = resolve_options(flags, cf);
  const auto& c = cf.system;
  LogSink log(log_file);
  auto sol = ruc::solve_ruc(c, opts, [&](const ruc::IterationRecord& r) {
    auto j = ruc::iteration_json(c, r, true);
    j["event"] = "iteration";
    log.write(j);
  });
  if (sol.decision && sol.converged() && certify_method != "none") {
    const auto m = certify_method == "enum" ? ruc::CertifyMethod::Enumeration : ruc::CertifyMethod::Dual;
    sol.certificate = ruc::certify(c, sol, m, opts.solver, opts.subproblem);
  }
  if (!out_dir.empty()) write_run_outputs(out_dir, c, sol, 1.0);
  ruc::Json summary = {{"event", "result"},
                       {"status", std::string(ruc::to_string(sol.status))},
                       {"iterations", sol.iterations.size()},
                       {"final_R", std::isfinite(sol.final_R) ? ruc::Json(sol.final_R) : ruc::Json(nullptr)},
                       {"cost", sol.decision && sol.converged() ? ruc::cost_json(sol.decision->cost) : ruc::Json(nullptr)},
                       {"message", sol.message}};
  if (sol.certificate) summary["certificate"] = {{"method", sol.certificate->method}, {"R", sol.certificate->R}};
  log.write(summary);
  if (sol.status != ruc::RucStatus::Converged) std::cerr << "ruc: " << ruc::to_string(sol.status) << ": " << sol.message << '\n';
  return exit_code(sol.status);
}

int cmd_verify(const std::string& case_path, const std::string& solution_path, const std::string& method, int samples,
               std::uint64_t seed, double epsilon, const std::string& out_file) {
  auto cf = ruc::load_case_file(case_path);
  warn(cf.warnings);
  const auto& c = cf.system;
  const auto doc = ruc::read_json_file(solution_path);
  const auto d = ruc::read_first_stage(doc, c);
  ruc::Json out = {{"method", method}};
  if (method == "mc") {
    const auto s = ruc::monte_carlo_evaluate(c, d, samples, seed, {}, epsilon);
    out["samples"] = s.samples;
    out["seed"] = s.seed;
    out["max_slack"] = s.max_slack;
    out["mean_slack"] = s.mean_slack;
    out["violation_rate"] = s.violation_rate;
    out["infeasible_samples"] = s.infeasible;
    out["threshold"] = s.threshold;
  } else {
    const auto m = method == "enum" ? ruc::CertifyMethod::Enumeration : ruc::CertifyMethod::Dual;
    const auto cert = ruc::certify(c, d, m, epsilon);
    out["R"] = cert.R;
    out["robust"] = cert.robust;
    out["epsilon_feas"] = epsilon;
    if (m == ruc::CertifyMethod::Enumeration) out["vectors"] = cert.vectors;
    out["worst_case"] = cert.v ? ruc::realization_json(c, *cert.v) : ruc::Json(nullptr);
  }
  const std::string text = out.dump(2) + "\n";
  if (!out_file.empty()) ruc::write_text_file(out_file, text);
  std::cout << text;
  return kOk;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ruc::InputError("--penetrations: '" + item + "' is not a number");
    }
  }
  return out;
}

int cmd_study(const std::string& case_path, RunFlags& flags, const std::string& penetrations,
              const std::vector<std::string>& modes, const std::string& out_dir) {
  auto cf = ruc::load_case_file(case_path);
  warn(cf.warnings);
  const auto opts = resolve_options(flags, cf);
  ruc::StudyConfig cfg;
  cfg.multipliers = parse_list(penetrations);
  cfg.modes.clear();
  for (const auto& m : modes) cfg.modes.push_back(ruc::parse_mode(m));
  cfg.output_dir = out_dir;
  const auto bundle = ruc::run_study(cfg, cf.system, opts, [](const ruc::StudyRun& r) {
    std::cerr << "study: " << ruc::detail::pct(r.multiplier) << "% " << ruc::to_string(r.mode) << " -> "
              << ruc::to_string(r.solution.status) << " (" << r.solution.iterations.size() << " iterations)\n";
  });
  std::vector<ruc::CostRow> rows;
  for (const auto& r : bundle.runs) rows.push_back(ruc::cost_row(r.mode, r.multiplier, r.solution));
  if (!out_dir.empty()) {
    ruc::write_study(bundle, cf.system, out_dir);
    for (const auto& r : bundle.runs) {
      const auto c = ruc::scale_penetration(cf.system, r.multiplier);
      auto doc = ruc::solution_json(c, r.solution);
      doc["penetration"] = r.multiplier;
      const std::string name = ruc::detail::pct(r.multiplier) + "_" + std::string(ruc::to_string(r.mode)) + ".json";
      ruc::write_text_file(fs::path(out_dir) / "runs" / name, doc.dump(2) + "\n");
    }
  }
  std::cout << ruc::cost_table_text(rows);
  return kOk;
}

int cmd_report(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& sub : {fs::path(dir), fs::path(dir) / "runs"}) {
    if (!fs::is_directory(sub)) continue;
    for (const auto& e : fs::directory_iterator(sub)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
  }
  if (!fs::is_directory(dir)) throw ruc::InputError(dir + ": not a directory");
  std::vector<std::pair<std::pair<double, std::string>, ruc::CostRow>> keyed;
  for (const auto& f : files) {
    const auto doc = ruc::read_json_file(f);
    if (!doc.is_object() || !doc.contains("status") || !doc.contains("mode")) continue;
    ruc::CostRow r;
    r.mode = doc.at("mode").get<std::string>();
    r.status = doc.at("status").get<std::string>();
    r.multiplier = doc.value("penetration", 1.0);
    r.iterations = doc.contains("iterations") ? static_cast<int>(doc.at("iterations").size()) : 0;
    r.final_R = doc.contains("final_R") && doc.at("final_R").is_number() ? doc.at("final_R").get<double>() : std::nan("");
    if (r.status == "Converged" && doc.contains("cost") && doc.at("cost").is_object()) {
      const auto& k = doc.at("cost");
      r.cost = ruc::CostBreakdown{k.value("startup", 0.0), k.value("no_load", 0.0), k.value("energy", 0.0)};
    }
    keyed.push_back({{r.multiplier, r.mode}, r});
  }
  if (keyed.empty()) throw ruc::InputError(dir + ": no solution files found");
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ruc::CostRow> rows;
  for (auto& [k, r] : keyed) rows.push_back(std::move(r));
  ruc::write_text_file(fs::path(dir) / "report_cost_table.csv", ruc::cost_table_csv(rows));
  ruc::write_text_file(fs::path(dir) / "report_cost_table.txt", ruc::cost_table_text(rows));
  std::cout << ruc::cost_table_text(rows);
  return kOk;
}

int cmd_export(const std::string& case_path, RunFlags& flags, const std::string& what, const std::string& format,
               const std::string& out_file) {
  auto cf = ruc::load_case_file(case_path);
  const auto opts = resolve_options(flags, cf);
  const auto& c = cf.system;
  const auto form = ruc::compile_recourse(c);
  const auto fmt = format == "mps" ? ruc::milp::ExportFormat::Mps : ruc::milp::ExportFormat::LpText;
  std::string text;
  const auto mm = ruc::build_master(c, form, {}, opts.mode, opts.master);
  if (what == "master") {
    text = ruc::milp::export_model(mm.model, fmt);
  } else {
    const auto master = ruc::solve_master(mm, c, opts.solver, opts.tie_break);
    if (!master.decision) throw ruc::SolverError("deterministic master has no solution");
    text = ruc::milp::export_model(ruc::build_dual_subproblem(c, form, *master.decision, opts.subproblem.big_m).model, fmt);
  }
  if (out_file.empty()) std::cout << text;
  else ruc::write_text_file(out_file, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust unit commitment with strategic wind generation curtailment"};
  app.require_subcommand(1);

  RunFlags solve_flags;
  std::string solve_case, solve_out, solve_log, solve_certify = "dual";
  auto* solve = app.add_subcommand("solve", "solve one case");
  solve->add_option("case", solve_case, "case JSON")->required();
  solve_flags.attach(solve);
  solve->add_option("--out", solve_out, "directory for solution.json and tables");
  solve->add_option("--log-file", solve_log, "write the JSON-lines iteration log here instead of stdout");
  solve->add_option("--certify", solve_certify, "re-check the converged first stage")
      ->check(CLI::IsMember({"dual", "enum", "none"}));

  std::string verify_case, verify_solution, verify_method = "enum", verify_out;
  int verify_samples = 10000;
  std::uint64_t verify_seed = 1;
  double verify_eps = 1e-4;
  auto* verify = app.add_subcommand("verify", "re-evaluate a stored first stage");
  verify->add_option("case", verify_case, "case JSON")->required();
  verify->add_option("solution", verify_solution, "solution.json from solve")->required();
  verify->add_option("--method", verify_method, "enum, dual or mc")->check(CLI::IsMember({"enum", "dual", "mc"}));
  verify->add_option("--samples", verify_samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_seed, "Monte Carlo seed");
  verify->add_option("--epsilon-feas", verify_eps, "slack threshold, MW")->check(CLI::NonNegativeNumber);
  verify->add_option("--out", verify_out, "also write the stats JSON here");

  RunFlags study_flags;
  std::string study_case, study_pen = "1.0", study_out;
  std::vector<std::string> study_modes{"wgc", "traditional"};
  auto* study = app.add_subcommand("study", "compare modes across wind penetration multipliers");
  study->add_option("case", study_case, "case JSON")->required();
  study_flags.attach(study);
  study->add_option("--penetrations", study_pen, "comma-separated multipliers, e.g. 1.0,1.1,1.2");
  study->add_option("--modes", study_modes, "modes to run")->delimiter(',')->check(CLI::IsMember({"wgc", "traditional"}));
  study->add_option("--out", study_out, "directory for tables and per-run solutions");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "tabulate the solutions found in a directory");
  report->add_option("dir", report_dir, "output directory of solve or study")->required();

  RunFlags export_flags;
  std::string export_case, export_what = "master", export_format = "lp", export_out;
  auto* exp = app.add_subcommand("export", "write the first master or subproblem as LP or MPS");
  exp->add_option("case", export_case, "case JSON")->required();
  export_flags.attach(exp);
  exp->add_option("--model", export_what, "master or subproblem")->check(CLI::IsMember({"master", "subproblem"}));
  exp->add_option("--format", export_format, "lp or mps")->check(CLI::IsMember({"lp", "mps"}));
  exp->add_option("--out", export_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*solve) return cmd_solve(solve_case, solve_flags, solve_out, solve_log, solve_certify);
    if (*verify) return cmd_verify(verify_case, verify_solution, verify_method, verify_samples, verify_seed, verify_eps, verify_out);
    if (*study) return cmd_study(study_case, study_flags, study_pen, study_modes, study_out);
    if (*report) return cmd_report(report_dir);
    if (*exp) return cmd_export(export_case, export_flags, export_what, export_format, export_out);
  } catch (const ruc::InputError& e) {
    std::cerr << "ruc: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ruc::SolverError& e) {
    std::cerr << "ruc: solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const ruc::ModelError& e) {
    std::cerr << "ruc: model error: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "ruc: " << e.what() << '\n';
    return kSolverError;
  }
  return kOk;
}
