#ifndef RUC_TESTS_FIXTURES_HPP
#define RUC_TESTS_FIXTURES_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ruc/master_problem.hpp"
#include "ruc/milp/solve.hpp"
#include "ruc/oracle.hpp"
#include "ruc/system_model.hpp"

namespace ruc::fixture {

/// One 50-200 MW unit with +/-50 MW/h ramps, flat 150 MW load over two hours and
/// a farm whose band opens to 100 MW in hour 2 only. The ramp 150 -> 50 cannot
/// be followed, so 50 MW of slack appear unless alpha_2 <= 0.5.
inline SystemCase ramp_instance(int gamma_t = 1, int gamma_s = 1) {
  SystemCase c;
  c.name = "ramp";
  c.horizon = 2;
  Generator g;
  g.id = "G1";
  g.bus = 1;
  g.p_min = 50;
  g.p_max = 200;
  g.ramp_up = 50;
  g.ramp_down = 50;
  g.cost = {0.01, 20.0};
  g.no_load_cost = 100;
  g.startup_cost = 500;
  g.initial = {true, 4, 150.0};
  c.generators.push_back(g);
  WindFarm w;
  w.id = "W1";
  w.bus = 1;
  w.capacity = 200;
  w.forecast = {0.0, 0.0};
  w.band_override = BandOverride{{0.0, 100.0}, {0.0, 0.0}};
  c.wind_farms.push_back(w);
  c.loads.push_back({"L1", 1, {150.0, 150.0}});
  c.network.buses = {1};
  c.network.reference_bus = 1;
  c.uncertainty.gamma_t = gamma_t;
  c.uncertainty.gamma_s = gamma_s;
  c.network.ptdf = compute_ptdf(c.network);
  rebuild_bands(c);
  return c;
}

/// Single bus, one 0-200 MW unit on since long ago, flat load, no wind.
inline SystemCase single_unit(int horizon, double load, bool initially_on) {
  SystemCase c;
  c.name = "single";
  c.horizon = horizon;
  Generator g;
  g.id = "G1";
  g.bus = 1;
  g.p_min = 20;
  g.p_max = 200;
  g.ramp_up = 200;
  g.ramp_down = 200;
  g.cost = {0.02, 15.0};
  g.no_load_cost = 80;
  g.startup_cost = 300;
  g.initial = {initially_on, 5, initially_on ? load : 0.0};
  c.generators.push_back(g);
  c.loads.push_back({"L1", 1, std::vector<double>(static_cast<std::size_t>(horizon), load)});
  c.network.buses = {1};
  c.network.reference_bus = 1;
  c.network.ptdf = compute_ptdf(c.network);
  rebuild_bands(c);
  return c;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Random network case with G <= 3, M <= 2, T <= 4 and at most `max_vertices`
/// budgeted realizations. Ramps and line limits are drawn tight enough to bind.
inline SystemCase random_tiny_case(std::mt19937_64& rng, std::uint64_t max_vertices = 200) {
  SystemCase c;
  c.name = "tiny";
  c.horizon = uniform_int(rng, 2, 4);
  const int T = c.horizon;
  const int buses = uniform_int(rng, 1, 3);
  for (int b = 1; b <= buses; ++b) c.network.buses.push_back(b);
  c.network.reference_bus = uniform_int(rng, 1, buses);
  int lid = 0;
  for (int b = 2; b <= buses; ++b) {
    c.network.lines.push_back({"L" + std::to_string(++lid), uniform_int(rng, 1, b - 1), b, uniform(rng, 0.05, 0.3),
                               uniform(rng, 40.0, 160.0)});
  }
  if (buses == 3 && uniform(rng, 0.0, 1.0) < 0.5) {
    // The tree is 1-2 plus x-3; close the triangle with the missing side.
    const int a = c.network.lines[1].from == 1 ? 2 : 1;
    const int b = 3;
    c.network.lines.push_back({"L" + std::to_string(++lid), a, b, uniform(rng, 0.05, 0.3), uniform(rng, 40.0, 160.0)});
  }

  const int G = uniform_int(rng, 1, 3);
  for (int g = 0; g < G; ++g) {
    Generator gen;
    gen.id = "G" + std::to_string(g + 1);
    gen.bus = uniform_int(rng, 1, buses);
    gen.p_min = uniform(rng, 0.0, 30.0);
    gen.p_max = gen.p_min + uniform(rng, 60.0, 160.0);
    gen.ramp_up = uniform(rng, 20.0, 120.0);
    gen.ramp_down = uniform(rng, 20.0, 120.0);
    gen.min_on = uniform_int(rng, 1, 2);
    gen.min_off = uniform_int(rng, 1, 2);
    gen.startup_cost = uniform(rng, 0.0, 400.0);
    gen.no_load_cost = uniform(rng, 0.0, 100.0);
    gen.cost = {uniform(rng, 0.0, 0.05), uniform(rng, 10.0, 40.0)};
    gen.initial.on = uniform(rng, 0.0, 1.0) < 0.7;
    gen.initial.hours = uniform_int(rng, 1, 3);
    gen.initial.p0 = gen.initial.on ? uniform(rng, gen.p_min, gen.p_max) : 0.0;
    c.generators.push_back(gen);
  }

  const int M = uniform_int(rng, 1, 2);
  for (int m = 0; m < M; ++m) {
    WindFarm w;
    w.id = "W" + std::to_string(m + 1);
    w.bus = uniform_int(rng, 1, buses);
    w.capacity = uniform(rng, 40.0, 150.0);
    for (int t = 0; t < T; ++t) w.forecast.push_back(uniform(rng, 0.0, 0.8) * w.capacity);
    w.sigma_base = uniform(rng, 0.05, 0.3);
    c.wind_farms.push_back(w);
  }

  const int J = uniform_int(rng, 1, 2);
  for (int j = 0; j < J; ++j) {
    Load l;
    l.id = "D" + std::to_string(j + 1);
    l.bus = uniform_int(rng, 1, buses);
    for (int t = 0; t < T; ++t) l.demand.push_back(uniform(rng, 30.0, 140.0));
    c.loads.push_back(l);
  }

  do {
    c.uncertainty.gamma_t = uniform_int(rng, 0, T);
    c.uncertainty.gamma_s = uniform_int(rng, 0, M);
  } while (EnumerationPlan::for_case(c).count() > max_vertices);
  c.network.ptdf = compute_ptdf(c.network);
  rebuild_bands(c);
  return c;
}

/// Random commitment and ratios. The commitment respects the startup logic; the
/// decision is returned only if every vertex realization leaves a recourse dispatch.
inline std::optional<FirstStageDecision> random_first_stage(const SystemCase& c, std::mt19937_64& rng) {
  const int G = c.num_generators();
  const int M = c.num_farms();
  const int T = c.horizon;
  FirstStageDecision d;
  d.generators = G;
  d.farms = M;
  d.periods = T;
  for (int g = 0; g < G; ++g) {
    const auto& gen = c.generators[static_cast<std::size_t>(g)];
    bool prev = gen.initial.on;
    for (int t = 0; t < T; ++t) {
      const bool on = uniform(rng, 0.0, 1.0) < 0.75;
      d.u.push_back(on ? 1 : 0);
      d.z.push_back(on && !prev ? 1 : 0);
      d.p_hat.push_back(on ? gen.p_min : 0.0);
      prev = on;
    }
  }
  for (int i = 0; i < M * T; ++i) {
    const double r = uniform(rng, 0.0, 1.0);
    d.alpha.push_back(r < 0.3 ? 1.0 : r < 0.4 ? 0.0 : uniform(rng, 0.0, 1.0));
  }
  bool ok = true;
  for_each_realization(EnumerationPlan::for_case(c), [&](const UncertaintyRealization& v) {
    const auto lp = build_recourse_lp(c, d, v);
    ok = milp::solve(lp.model).status == milp::SolveStatus::Optimal;
    return ok;
  });
  if (!ok) return std::nullopt;
  return d;
}

}  // namespace ruc::fixture

#endif  // RUC_TESTS_FIXTURES_HPP
