#ifndef RUC_ORACLE_HPP
#define RUC_ORACLE_HPP

// Ground truth for the dual subproblem: exhaustive enumeration of the budgeted
// vertex set, and a Monte Carlo probe of interior wind trajectories.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ruc/errors.hpp"
#include "ruc/gaussian.hpp"
#include "ruc/master_problem.hpp"
#include "ruc/subproblem.hpp"
#include "ruc/system_model.hpp"

namespace ruc {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

struct EnumerationPlan {
  int farms = 0;
  int periods = 0;
  int gamma_t = 0;
  int gamma_s = 0;

  static EnumerationPlan for_case(const SystemCase& c) {
    return {c.num_farms(), c.horizon, c.uncertainty.gamma_t, c.uncertainty.gamma_s};
  }

  /// Number of feasible v, by DP over periods on the per-farm deviation counts.
  /// Saturates at the largest uint64 value.
  [[nodiscard]] std::uint64_t count() const {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    auto add = [](std::uint64_t a, std::uint64_t b) { return a > kMax - b ? kMax : a + b; };
    auto mul = [](std::uint64_t a, std::uint64_t b) { return (b != 0 && a > kMax / b) ? kMax : a * b; };
    const int cap_t = std::max(0, gamma_t);
    const int cap_s = std::max(0, gamma_s);
    std::map<std::vector<int>, std::uint64_t> states{{std::vector<int>(static_cast<std::size_t>(farms), 0), 1}};
    for (int t = 0; t < periods; ++t) {
      std::map<std::vector<int>, std::uint64_t> next;
      for (const auto& [used, ways] : states) {
        // Each farm stays put or deviates (2 directions); at most cap_s deviate.
        std::function<void(int, int, std::vector<int>&, std::uint64_t)> visit =
            [&](int m, int deviating, std::vector<int>& cur, std::uint64_t mult) {
              if (m == farms) {
                auto& slot = next[cur];
                slot = add(slot, mul(ways, mult));
                return;
              }
              visit(m + 1, deviating, cur, mult);
              if (deviating < cap_s && cur[static_cast<std::size_t>(m)] < cap_t) {
                ++cur[static_cast<std::size_t>(m)];
                visit(m + 1, deviating + 1, cur, mul(mult, 2));
                --cur[static_cast<std::size_t>(m)];
              }
            };
        std::vector<int> cur = used;
        visit(0, 0, cur, 1);
      }
      states = std::move(next);
    }
    std::uint64_t total = 0;
    for (const auto& [used, ways] : states) total = add(total, ways);
    return total;
  }
};

/// Calls `fn` on every feasible v exactly once, all-zeros first, until it returns false.
///
/// Cells are visited farm-major (m*T + t) with states {none, up, down}; the order is
/// lexicographic in that digit sequence, pruned by both budgets.
inline void for_each_realization(const EnumerationPlan& plan,
                                 const std::function<bool(const UncertaintyRealization&)>& fn) {
  auto v = UncertaintyRealization::zeros(plan.farms, plan.periods);
  std::vector<int> farm_used(static_cast<std::size_t>(plan.farms), 0);
  std::vector<int> period_used(static_cast<std::size_t>(plan.periods), 0);
  const int cells = plan.farms * plan.periods;
  bool stop = false;
  std::function<void(int)> dfs = [&](int cell) {
    if (stop) return;
    if (cell == cells) {
      if (!fn(v)) stop = true;
      return;
    }
    const int m = cell / plan.periods;
    const int t = cell % plan.periods;
    const auto mi = static_cast<std::size_t>(m);
    const auto ti = static_cast<std::size_t>(t);
    const auto i = static_cast<std::size_t>(cell);
    dfs(cell + 1);
    if (farm_used[mi] >= plan.gamma_t || period_used[ti] >= plan.gamma_s) return;
    ++farm_used[mi];
    ++period_used[ti];
    v.up[i] = 1;
    dfs(cell + 1);
    v.up[i] = 0;
    v.down[i] = 1;
    dfs(cell + 1);
    v.down[i] = 0;
    --farm_used[mi];
    --period_used[ti];
  };
  dfs(0);
}

inline std::vector<UncertaintyRealization> enumerate_realizations(const EnumerationPlan& plan,
                                                                  std::uint64_t cap = kDefaultEnumerationCap) {
  const auto n = plan.count();
  if (n > cap) {
    throw InputError("uncertainty set has " + std::to_string(n) + " feasible vertices, above the enumeration cap of " +
                     std::to_string(cap) + "; use the dual method");
  }
  std::vector<UncertaintyRealization> out;
  out.reserve(static_cast<std::size_t>(n));
  for_each_realization(plan, [&](const UncertaintyRealization& v) {
    out.push_back(v);
    return true;
  });
  return out;
}

struct EnumerationResult {
  double R = 0.0;
  UncertaintyRealization v;  ///< first argmax in enumeration order
  std::uint64_t vectors = 0;
};

/// Largest recourse optimum over every feasible vertex realization.
inline EnumerationResult worst_case_by_enumeration(const SystemCase& c, const FirstStageDecision& d,
                                                   const milp::SolverParams& params = {},
                                                   std::uint64_t cap = kDefaultEnumerationCap) {
  const auto plan = EnumerationPlan::for_case(c);
  const auto n = plan.count();
  if (n > cap) {
    throw InputError("uncertainty set has " + std::to_string(n) + " feasible vertices, above the enumeration cap of " +
                     std::to_string(cap) + "; use the dual method");
  }
  EnumerationResult best;
  best.R = -1.0;
  for_each_realization(plan, [&](const UncertaintyRealization& v) {
    ++best.vectors;
    const auto r = recourse_optimum(c, d, realized_wind(c, d, v), params);
    if (!r) {
      std::string where;
      for (int m = 0; m < v.farms; ++m) {
        for (int t = 0; t < v.periods; ++t) {
          if (!v.up_at(m, t) && !v.down_at(m, t)) continue;
          where += (where.empty() ? "" : ", ") + std::string(v.up_at(m, t) ? "up" : "down") + detail::mt_name(c, m, t);
        }
      }
      throw ModelError("recourse LP infeasible at realization {" + (where.empty() ? std::string("nominal") : where) + "}");
    }
    if (*r > best.R) {
      best.R = *r;
      best.v = v;
    }
    return true;
  });
  return best;
}

struct EvaluationStats {
  int samples = 0;
  double max_slack = 0.0;
  double mean_slack = 0.0;
  double violation_rate = 0.0;  ///< fraction of samples with slack above the threshold
  int infeasible = 0;           ///< samples with no recourse dispatch (counted as violations)
  std::uint64_t seed = 0;
  double threshold = 1e-4;
};

/// Uniform on (0, 1) from the top 53 bits of one mt19937_64 draw.
inline double unit_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Draw from N(mean, sigma) truncated to [lo, hi] by inverting the CDF.
inline double truncated_normal(std::mt19937_64& rng, double mean, double sigma, double lo, double hi) {
  const double u = unit_uniform(rng);
  if (!(sigma > 0.0)) return std::clamp(mean, lo, hi);
  const double a = normal_cdf((lo - mean) / sigma);
  const double b = normal_cdf((hi - mean) / sigma);
  if (!(b > a)) return std::clamp(mean, lo, hi);
  const double p = std::clamp(a + u * (b - a), 1e-300, 1.0 - 1e-16);
  return std::clamp(mean + sigma * normal_quantile(p), lo, hi);
}

/// One forecast-error trajectory per farm and period (m*T + t), before alpha scaling.
/// Draw order: farm-major then period.
inline std::vector<double> sample_wind(const SystemCase& c, std::mt19937_64& rng) {
  const int T = c.horizon;
  std::vector<double> w(static_cast<std::size_t>(c.num_farms() * T));
  for (int m = 0; m < c.num_farms(); ++m) {
    const auto& farm = c.wind_farms[static_cast<std::size_t>(m)];
    const auto& band = c.bands[static_cast<std::size_t>(m)];
    for (int t = 0; t < T; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      w[static_cast<std::size_t>(m * T + t)] =
          truncated_normal(rng, farm.forecast[ti], band.sigma[ti], 0.0, farm.capacity);
    }
  }
  return w;
}

/// Empirical slack of `d` under sampled wind, scaled by the committed ratios.
inline EvaluationStats monte_carlo_evaluate(const SystemCase& c, const FirstStageDecision& d, int n_samples,
                                            std::uint64_t seed, const milp::SolverParams& params = {},
                                            double threshold = 1e-4) {
  if (n_samples < 1) throw InputError("Monte Carlo needs at least one sample");
  EvaluationStats s;
  s.samples = n_samples;
  s.seed = seed;
  s.threshold = threshold;
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  int violations = 0;
  for (int k = 0; k < n_samples; ++k) {
    auto w = sample_wind(c, rng);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= d.alpha[i];
    const auto r = recourse_optimum(c, d, w, params);
    if (!r) {
      ++s.infeasible;
      ++violations;
      continue;
    }
    sum += *r;
    s.max_slack = std::max(s.max_slack, *r);
    if (*r > threshold) ++violations;
  }
  const int feasible = n_samples - s.infeasible;
  s.mean_slack = feasible > 0 ? sum / feasible : 0.0;
  s.violation_rate = static_cast<double>(violations) / n_samples;
  return s;
}

}  // namespace ruc

#endif  // RUC_ORACLE_HPP
