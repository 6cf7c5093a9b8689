// End-to-end checks of the robust commitment solver, one verdict line each.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "ruc/case_io.hpp"
#include "ruc/ccg.hpp"
#include "ruc/oracle.hpp"
#include "ruc/reporting.hpp"

namespace {

using namespace ruc;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

const fs::path kData = RUC_DATA_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Verdict& v) {
  std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << v.detail << std::endl;
  if (!v.pass) ++failures;
}

double since(clock_type::time_point t0) { return std::chrono::duration<double>(clock_type::now() - t0).count(); }

std::string num(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& cmd) {
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Verdict oracle_equivalence() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(7);
  int cases = 0;
  double worst = 0.0;
  while (cases < 25) {
    const auto c = fixture::random_tiny_case(rng, 200);
    const auto d = fixture::random_first_stage(c, rng);
    if (!d) continue;
    ++cases;
    worst = std::max(worst, std::abs(solve_subproblem(c, *d).R - worst_case_by_enumeration(c, *d).R));
  }
  const double secs = since(t0);
  return {worst <= 1e-5 && secs < 120.0,
          std::to_string(cases) + " cases, max |R_dual - R_enum| = " + num(worst) + " MW, " + num(secs, 3) + " s"};
}

Verdict ramp_trace() {
  const auto t0 = clock_type::now();
  const auto c = fixture::ramp_instance();
  RucOptions wgc;
  const auto a = solve_ruc(c, wgc);
  RucOptions trad;
  trad.mode = Mode::Traditional;
  const auto b = solve_ruc(c, trad);
  double alpha = std::nan("");
  double certified = std::nan("");
  if (a.converged()) {
    alpha = a.decision->ratio(0, 1);
    certified = certify(c, a, CertifyMethod::Dual).R;
  }
  const double secs = since(t0);
  const bool ok = a.converged() && a.iterations.size() == 2 && alpha <= 0.5 + 1e-6 && certified <= 1e-4 &&
                  b.status == RucStatus::RobustInfeasible && secs < 5.0;
  return {ok, "wgc " + std::string(to_string(a.status)) + " in " + std::to_string(a.iterations.size()) +
                  " iterations, alpha(W1,2) = " + num(alpha) + ", certified R = " + num(certified) + "; traditional " +
                  std::string(to_string(b.status)) + ", " + num(secs, 3) + " s"};
}

ReportBundle ieee_study(double& secs) {
  const auto t0 = clock_type::now();
  StudyConfig cfg;
  cfg.multipliers = {1.0, 1.1, 1.2};
  const auto bundle = run_study(cfg, load_case(kData / "ieee39_wind.json"));
  secs = since(t0);
  return bundle;
}

Verdict cost_dominance(const ReportBundle& bundle, double secs) {
  const double gap = milp::SolverParams{}.relative_gap;
  bool ok = secs < 900.0;
  std::string text;
  for (std::size_t i = 0; i + 1 < bundle.runs.size(); i += 2) {
    const auto& w = bundle.runs[i].mode == Mode::Wgc ? bundle.runs[i] : bundle.runs[i + 1];
    const auto& t = bundle.runs[i].mode == Mode::Wgc ? bundle.runs[i + 1] : bundle.runs[i];
    text += detail::pct(w.multiplier) + "%: ";
    if (w.solution.converged() && t.solution.converged()) {
      const double tw = w.solution.cost().total();
      const double tt = t.solution.cost().total();
      ok = ok && tw <= tt * (1 + 2 * gap);
      text += "wgc " + num(tw, 9) + " vs trad " + num(tt, 9);
    } else {
      text += "wgc " + std::string(to_string(w.solution.status)) + ", trad " + std::string(to_string(t.solution.status));
    }
    text += "; ";
  }
  return {ok, text + num(secs, 4) + " s"};
}

Verdict frontier() {
  StudyConfig cfg;
  cfg.multipliers = {0.5, 1.0};
  const auto bundle = run_study(cfg, fixture::ramp_instance());
  bool found = false;
  std::string text;
  for (std::size_t i = 0; i + 1 < bundle.runs.size(); i += 2) {
    const auto& w = bundle.runs[i].mode == Mode::Wgc ? bundle.runs[i] : bundle.runs[i + 1];
    const auto& t = bundle.runs[i].mode == Mode::Wgc ? bundle.runs[i + 1] : bundle.runs[i];
    found = found || (t.solution.status == RucStatus::RobustInfeasible && w.solution.converged());
    text += detail::pct(w.multiplier) + "%: wgc " + std::string(to_string(w.solution.status)) + ", trad " +
              std::string(to_string(t.solution.status)) + "; ";
  }
  return {found, text};
}

Verdict iteration_economy(const ReportBundle& bundle) {
  for (std::size_t i = 0; i + 1 < bundle.runs.size(); i += 2) {
    if (bundle.runs[i].multiplier != 1.0) continue;
    const auto& w = bundle.runs[i].mode == Mode::Wgc ? bundle.runs[i] : bundle.runs[i + 1];
    const auto& t = bundle.runs[i].mode == Mode::Wgc ? bundle.runs[i + 1] : bundle.runs[i];
    const auto iw = w.solution.iterations.size();
    const auto it = t.solution.iterations.size();
    const bool ok = w.solution.converged() && t.solution.converged() && iw <= 10 && it <= 10;
    return {ok, "wgc " + std::to_string(iw) + ", traditional " + std::to_string(it) +
                    " iterations; wgc <= traditional: " + (iw <= it ? "yes" : "no")};
  }
  return {false, "bundled case missing from the study"};
}

Verdict invariant_suites() {
  const int code = run(std::string("\"") + RUC_TESTS_PATH + "\" --gtest_brief=1 > acceptance_invariants.log 2>&1");
  return {code == 0, "unit suite exit " + std::to_string(code) + " (log in acceptance_invariants.log)"};
}

Verdict determinism() {
  bool ok = true;
  std::string text;
  struct Case {
    std::string label;
    fs::path file;
    std::string extra;
  };
  fs::create_directories("acceptance_det");
  for (const auto& [label, file, extra] : std::vector<Case>{{"ramp", kData / "ramp_instance.json", ""},
                                                            {"ieee39", kData / "ieee39_wind.json", " --max-iter 2"}}) {
    std::vector<fs::path> dirs;
    for (const char* tag : {"a", "b"}) {
      const fs::path dir = fs::path("acceptance_det") / (label + "_" + tag);
      fs::remove_all(dir);
      const std::string cmd = std::string("\"") + RUC_CLI_PATH + "\" solve \"" + file.string() + "\" --seed 1" + extra +
                              " --out \"" + dir.string() + "\" --log-file \"" + (dir.string() + ".jsonl") + "\" > /dev/null 2>&1";
      const int code = run(cmd);
      if (code != 0 && code != 1) ok = false;
      dirs.push_back(dir);
    }
    int files = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++files;
      const auto other = dirs[1] / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        ok = false;
        text += label + "/" + entry.path().filename().string() + " differs; ";
      }
    }
    if (files == 0) ok = false;
    text += label + ": " + std::to_string(files) + " files compared; ";
  }
  return {ok, text};
}

}  // namespace

int main() {
  report(1, "oracle equivalence", oracle_equivalence());
  report(2, "constructed ramp instance", ramp_trace());
  double secs = 0.0;
  const auto study = ieee_study(secs);
  report(3, "cost dominance on the 39-bus case", cost_dominance(study, secs));
  report(4, "solvability frontier", frontier());
  report(5, "iteration economy", iteration_economy(study));
  report(6, "invariant suites", invariant_suites());
  report(7, "determinism", determinism());
  return failures == 0 ? 0 : 1;
}
