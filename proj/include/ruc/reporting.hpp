#ifndef RUC_REPORTING_HPP
#define RUC_REPORTING_HPP

// Post-processing of solved cases: wind benefit, ramp capability, penetration
// studies and their CSV/text tables.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ruc/case_io.hpp"
#include "ruc/ccg.hpp"
#include "ruc/master_problem.hpp"
#include "ruc/system_model.hpp"

namespace ruc {

/// Q_m = sum_t delta_mt (1 - alpha_mt) forecast_mt: value of the wind withheld per farm.
inline std::vector<double> wind_benefit(const FirstStageDecision& d, const SystemCase& c) {
  std::vector<double> q(static_cast<std::size_t>(d.farms), 0.0);
  for (int m = 0; m < d.farms; ++m) {
    const auto& farm = c.wind_farms[static_cast<std::size_t>(m)];
    if (farm.price_coefficient.empty()) continue;
    for (int t = 0; t < d.periods; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      q[static_cast<std::size_t>(m)] += farm.price_coefficient[ti] * (1.0 - d.ratio(m, t)) * farm.forecast[ti];
    }
  }
  return q;
}

/// Two readings of ramp capability, both MW/h per period.
struct RampCapability {
  std::vector<double> committed;      ///< sum_m alpha ŵ
  std::vector<double> delta;          ///< committed_t - committed_{t-1}; 0 in the first period
  std::vector<double> headroom_up;    ///< sum_m alpha (w^u - ŵ)
  std::vector<double> headroom_down;  ///< sum_m alpha (ŵ - w^l)
  double avg_delta_up = 0.0;          ///< mean over t >= 2 of max(delta, 0)
  double avg_delta_down = 0.0;        ///< mean over t >= 2 of max(-delta, 0)
  double avg_headroom_up = 0.0;
  double avg_headroom_down = 0.0;
};

inline RampCapability ramp_capability(const FirstStageDecision& d, const SystemCase& c) {
  const int T = d.periods;
  RampCapability r;
  r.committed.assign(static_cast<std::size_t>(T), 0.0);
  r.headroom_up.assign(static_cast<std::size_t>(T), 0.0);
  r.headroom_down.assign(static_cast<std::size_t>(T), 0.0);
  for (int m = 0; m < d.farms; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    for (int t = 0; t < T; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      const double a = d.ratio(m, t);
      const double w = c.wind_farms[mi].forecast[ti];
      r.committed[ti] += a * w;
      r.headroom_up[ti] += a * (c.bands[mi].upper[ti] - w);
      r.headroom_down[ti] += a * (w - c.bands[mi].lower[ti]);
    }
  }
  r.delta.assign(static_cast<std::size_t>(T), 0.0);
  for (int t = 1; t < T; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    r.delta[ti] = r.committed[ti] - r.committed[ti - 1];
    r.avg_delta_up += std::max(r.delta[ti], 0.0);
    r.avg_delta_down += std::max(-r.delta[ti], 0.0);
  }
  if (T > 1) {
    r.avg_delta_up /= T - 1;
    r.avg_delta_down /= T - 1;
  }
  for (int t = 0; t < T; ++t) {
    r.avg_headroom_up += r.headroom_up[static_cast<std::size_t>(t)] / T;
    r.avg_headroom_down += r.headroom_down[static_cast<std::size_t>(t)] / T;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Studies

struct StudyConfig {
  std::vector<double> multipliers;
  std::vector<Mode> modes{Mode::Wgc, Mode::Traditional};
  std::filesystem::path output_dir;
};

struct StudyRun {
  Mode mode = Mode::Wgc;
  double multiplier = 1.0;
  RucSolution solution;
  double seconds = 0.0;
};

struct ReportBundle {
  std::vector<StudyRun> runs;  ///< sorted by (multiplier, mode)
};

/// Solves every (mode, multiplier) pair. Failures stay in the bundle as their status.
inline ReportBundle run_study(const StudyConfig& cfg, const SystemCase& base, const RucOptions& options = {},
                              const std::function<void(const StudyRun&)>& on_run = {}) {
  for (double m : cfg.multipliers) {
    if (!(m > 0.0)) throw InputError("penetration multipliers must be positive");
  }
  ReportBundle out;
  std::vector<double> mults = cfg.multipliers;
  std::sort(mults.begin(), mults.end());
  mults.erase(std::unique(mults.begin(), mults.end()), mults.end());
  for (double mult : mults) {
    const SystemCase c = scale_penetration(base, mult);
    for (Mode mode : cfg.modes) {
      RucOptions o = options;
      o.mode = mode;
      StudyRun run;
      run.mode = mode;
      run.multiplier = mult;
      const auto t0 = std::chrono::steady_clock::now();
      run.solution = solve_ruc(c, o);
      run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (on_run) on_run(run);
      out.runs.push_back(std::move(run));
    }
  }
  return out;
}

namespace detail {

inline std::string fmt(double x, int digits = 6) {
  if (!std::isfinite(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

inline std::string pct(double multiplier) { return fmt(multiplier * 100.0, 4); }

}  // namespace detail

/// One summary row per solved run.
struct CostRow {
  std::string mode;
  double multiplier = 1.0;
  std::string status;
  std::optional<CostBreakdown> cost;  ///< absent unless converged
  int iterations = 0;
  double final_R = std::nan("");
};

inline CostRow cost_row(Mode mode, double multiplier, const RucSolution& s) {
  CostRow r;
  r.mode = std::string(to_string(mode));
  r.multiplier = multiplier;
  r.status = std::string(to_string(s.status));
  if (s.converged() && s.decision) r.cost = s.decision->cost;
  r.iterations = static_cast<int>(s.iterations.size());
  r.final_R = s.final_R;
  return r;
}

/// CSV: penetration_pct,mode,status,total,uc,ed,iterations,final_R.
inline std::string cost_table_csv(const std::vector<CostRow>& rows) {
  std::string out = "penetration_pct,mode,status,total,uc,ed,iterations,final_R\n";
  for (const auto& r : rows) {
    out += detail::pct(r.multiplier) + "," + r.mode + "," + r.status + ",";
    if (r.cost) out += detail::fmt(r.cost->total(), 4) + "," + detail::fmt(r.cost->uc(), 4) + "," + detail::fmt(r.cost->ed(), 4);
    else out += ",,";
    out += "," + std::to_string(r.iterations) + "," + detail::fmt(r.final_R, 9) + "\n";
  }
  return out;
}

/// Fixed-width table; non-converged runs read "No Solution" (robust infeasible) or their status.
inline std::string cost_table_text(const std::vector<CostRow>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-12s %16s %14s %16s %6s\n", "Penetration", "Model", "Total ($)", "UC ($)",
                "ED ($)", "Iter");
  out += line;
  for (const auto& r : rows) {
    const std::string p = detail::pct(r.multiplier) + "%";
    if (r.cost) {
      std::snprintf(line, sizeof line, "%-12s %-12s %16.2f %14.2f %16.2f %6d\n", p.c_str(), r.mode.c_str(),
                    r.cost->total(), r.cost->uc(), r.cost->ed(), r.iterations);
    } else {
      const std::string what = r.status == "RobustInfeasible" ? "No Solution" : r.status;
      std::snprintf(line, sizeof line, "%-12s %-12s %16s %14s %16s %6d\n", p.c_str(), r.mode.c_str(), what.c_str(),
                    "", "", r.iterations);
    }
    out += line;
  }
  return out;
}

/// Tidy series (penetration_pct, mode, period, series, value) for a decision.
inline std::string series_rows(const std::string& prefix, const FirstStageDecision& d, const SystemCase& c) {
  std::string out;
  const auto ramp = ramp_capability(d, c);
  auto row = [&](int t, const std::string& series, double v) {
    out += prefix + std::to_string(t + 1) + "," + series + "," + detail::fmt(v, 6) + "\n";
  };
  for (int t = 0; t < d.periods; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    double forecast = 0.0, upper = 0.0, lower = 0.0;
    for (int m = 0; m < d.farms; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      forecast += c.wind_farms[mi].forecast[ti];
      upper += d.ratio(m, t) * c.bands[mi].upper[ti];
      lower += d.ratio(m, t) * c.bands[mi].lower[ti];
    }
    row(t, "forecast", forecast);
    row(t, "committed", ramp.committed[ti]);
    row(t, "band_upper", upper);
    row(t, "band_lower", lower);
    row(t, "ramp_delta", ramp.delta[ti]);
    row(t, "ramp_headroom_up", ramp.headroom_up[ti]);
    row(t, "ramp_headroom_down", ramp.headroom_down[ti]);
  }
  return out;
}

inline constexpr const char* kSeriesHeader = "penetration_pct,mode,period,series,value\n";

/// CSV: penetration_pct,mode,farm,Q.
inline std::string wind_benefit_rows(const std::string& prefix, const FirstStageDecision& d, const SystemCase& c) {
  std::string out;
  const auto q = wind_benefit(d, c);
  for (int m = 0; m < d.farms; ++m) {
    out += prefix + c.wind_farms[static_cast<std::size_t>(m)].id + "," + detail::fmt(q[static_cast<std::size_t>(m)], 6) + "\n";
  }
  return out;
}

/// CSV: penetration_pct,mode,avg_delta_up,avg_delta_down,avg_headroom_up,avg_headroom_down.
inline std::string ramp_summary_row(const std::string& prefix, const FirstStageDecision& d, const SystemCase& c) {
  const auto r = ramp_capability(d, c);
  return prefix + detail::fmt(r.avg_delta_up) + "," + detail::fmt(r.avg_delta_down) + "," +
         detail::fmt(r.avg_headroom_up) + "," + detail::fmt(r.avg_headroom_down) + "\n";
}

/// Writes the study tables under `dir`. Everything except timing.csv is deterministic.
inline void write_study(const ReportBundle& bundle, const SystemCase& base, const std::filesystem::path& dir) {
  std::vector<CostRow> rows;
  std::string series = kSeriesHeader;
  std::string benefit = "penetration_pct,mode,farm,Q\n";
  std::string ramps = "penetration_pct,mode,avg_delta_up,avg_delta_down,avg_headroom_up,avg_headroom_down\n";
  std::string iters = "penetration_pct,mode,k,master_status,master_objective,R\n";
  std::string timing = "penetration_pct,mode,seconds\n";
  for (const auto& run : bundle.runs) {
    rows.push_back(cost_row(run.mode, run.multiplier, run.solution));
    const std::string prefix = detail::pct(run.multiplier) + "," + std::string(to_string(run.mode)) + ",";
    for (const auto& it : run.solution.iterations) {
      iters += prefix + std::to_string(it.k) + "," + std::string(milp::to_string(it.master_status)) + "," +
               detail::fmt(it.master_objective, 4) + "," + detail::fmt(it.R, 9) + "\n";
    }
    timing += prefix + detail::fmt(run.seconds, 3) + "\n";
    if (!run.solution.converged() || !run.solution.decision) continue;
    const SystemCase c = scale_penetration(base, run.multiplier);
    series += series_rows(prefix, *run.solution.decision, c);
    benefit += wind_benefit_rows(prefix, *run.solution.decision, c);
    ramps += ramp_summary_row(prefix, *run.solution.decision, c);
  }
  write_text_file(dir / "cost_table.csv", cost_table_csv(rows));
  write_text_file(dir / "cost_table.txt", cost_table_text(rows));
  write_text_file(dir / "wind_series.csv", series);
  write_text_file(dir / "wind_benefit.csv", benefit);
  write_text_file(dir / "ramp_capability.csv", ramps);
  write_text_file(dir / "iterations.csv", iters);
  write_text_file(dir / "timing.csv", timing);
}

}  // namespace ruc

#endif  // RUC_REPORTING_HPP
