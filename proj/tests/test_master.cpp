#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "ruc/master_problem.hpp"
#include "ruc/subproblem.hpp"

namespace {

using namespace ruc;

milp::SolverParams exact() {
  milp::SolverParams p;
  p.relative_gap = 0.0;
  p.absolute_gap = 1e-9;
  return p;
}

// Maximal runs of equal status, with the carried-in hours added to the first one.
bool runs_respect_minimums(const Generator& g, const FirstStageDecision& d, int gi) {
  const int T = d.periods;
  int t = 0;
  bool status = g.initial.on;
  int length = g.initial.hours;
  while (t < T) {
    if (d.on(gi, t) == status) {
      ++length;
      ++t;
      continue;
    }
    if (length < (status ? g.min_on : g.min_off)) return false;
    status = d.on(gi, t);
    length = 0;
  }
  return true;
}

TEST(Master, SingleUnitHandSolution) {
  const auto c = fixture::single_unit(2, 100, false);
  const auto mm = build_master(c, CutPool{}, Mode::Wgc);
  const auto out = solve_master(mm, c, exact());
  ASSERT_EQ(out.result.status, milp::SolveStatus::Optimal);
  ASSERT_TRUE(out.decision);
  const auto& g = c.generators[0];
  const auto pwl = piecewise_linearize(g.cost, g.p_min, g.p_max, 4);
  EXPECT_NEAR(out.result.objective, g.startup_cost + 2 * g.no_load_cost + 2 * pwl(100), 1e-6);
  EXPECT_TRUE(out.decision->on(0, 0) && out.decision->on(0, 1));
  EXPECT_TRUE(out.decision->started(0, 0));
  EXPECT_FALSE(out.decision->started(0, 1));
  EXPECT_NEAR(out.decision->dispatch(0, 1), 100, 1e-6);
}

TEST(Master, UnitStartsInThirdPeriod) {
  auto c = fixture::single_unit(4, 100, false);
  c.loads[0].demand = {0, 0, 100, 100};
  const auto out = solve_master(build_master(c, CutPool{}, Mode::Wgc), c, exact());
  ASSERT_TRUE(out.decision);
  const auto& d = *out.decision;
  EXPECT_EQ(d.z, (std::vector<std::uint8_t>{0, 0, 1, 0}));
  EXPECT_EQ(d.u, (std::vector<std::uint8_t>{0, 0, 1, 1}));
  EXPECT_EQ(d.dispatch(0, 0), 0.0);
}

TEST(Master, UnitOffWholeHorizon) {
  auto c = fixture::single_unit(3, 0, false);
  const auto out = solve_master(build_master(c, CutPool{}, Mode::Wgc), c, exact());
  ASSERT_TRUE(out.decision);
  for (int t = 0; t < 3; ++t) {
    EXPECT_FALSE(out.decision->started(0, t));
    EXPECT_EQ(out.decision->dispatch(0, t), 0.0);
  }
  EXPECT_EQ(out.decision->cost.total(), 0.0);
}

TEST(Master, TraditionalPinsEveryAlpha) {
  const auto c = fixture::ramp_instance();
  const auto mm = build_master(c, CutPool{}, Mode::Traditional);
  for (int t = 1; t <= 2; ++t) {
    const auto row = mm.model.find_constraint("alpha_fix[W1," + std::to_string(t) + "]");
    ASSERT_TRUE(row);
    const auto& r = mm.model.constraints()[*row];
    EXPECT_EQ(r.sense, milp::RowSense::Equal);
    EXPECT_EQ(r.rhs, 1.0);
  }
}

TEST(Master, NamingContract) {
  const auto c = fixture::ramp_instance();
  CutPool pool;
  pool.add(1, UncertaintyRealization::zeros(1, 2));
  const auto mm = build_master(c, pool, Mode::Wgc);
  for (const char* n : {"u[G1,1]", "z[G1,2]", "phat[G1,1]", "alpha[W1,2]", "p[1][G1,2]"}) {
    EXPECT_TRUE(mm.model.find_variable(n)) << n;
  }
}

TEST(Master, ZeroCutChangesNothing) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = fixture::random_tiny_case(rng);
    const auto plain = solve_master(build_master(c, CutPool{}, Mode::Wgc), c, exact());
    CutPool pool;
    pool.add(1, UncertaintyRealization::zeros(c.num_farms(), c.horizon));
    const auto cut = solve_master(build_master(c, pool, Mode::Wgc), c, exact());
    ASSERT_EQ(plain.result.status, cut.result.status);
    if (plain.result.has_solution()) EXPECT_NEAR(plain.result.objective, cut.result.objective, 1e-6);
  }
}

TEST(Master, MonotoneInCutsAndModeDominance) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int trial = 0; trial < 15; ++trial) {
    const auto c = fixture::random_tiny_case(rng);
    const auto vertices = enumerate_realizations(EnumerationPlan::for_case(c));
    CutPool pool;
    double prev_wgc = -milp::kInfinity;
    double prev_trad = -milp::kInfinity;
    bool wgc_open = true, trad_open = true;
    for (int k = 0; k < 4; ++k) {
      pool.add(k + 1, vertices[static_cast<std::size_t>(fixture::uniform_int(rng, 0, static_cast<int>(vertices.size()) - 1))]);
      const auto w = solve_master(build_master(c, pool, Mode::Wgc), c, exact());
      const auto t = solve_master(build_master(c, pool, Mode::Traditional), c, exact());
      if (w.result.has_solution()) {
        EXPECT_TRUE(wgc_open) << "a master became feasible again after adding a cut";
        EXPECT_GE(w.result.objective, prev_wgc - 1e-6 * std::max(1.0, std::abs(prev_wgc)));
        prev_wgc = w.result.objective;
      } else {
        wgc_open = false;
      }
      if (t.result.has_solution()) {
        EXPECT_TRUE(trad_open);
        EXPECT_GE(t.result.objective, prev_trad - 1e-6 * std::max(1.0, std::abs(prev_trad)));
        prev_trad = t.result.objective;
        ASSERT_TRUE(w.result.has_solution()) << "alpha = 1 is feasible for wgc";
        EXPECT_LE(w.result.objective, t.result.objective + 1e-6 * std::max(1.0, t.result.objective));
        ++checked;
      } else {
        trad_open = false;
      }
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(Master, DecisionInvariants) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 15; ++trial) {
    const auto c = fixture::random_tiny_case(rng);
    const auto out = solve_master(build_master(c, CutPool{}, Mode::Wgc), c, exact(), AlphaTieBreak::MaxCommit);
    if (!out.decision) continue;
    const auto& d = *out.decision;
    for (int g = 0; g < c.num_generators(); ++g) {
      const auto& gen = c.generators[g];
      EXPECT_TRUE(runs_respect_minimums(gen, d, g)) << "trial " << trial << " generator " << g;
      bool prev = gen.initial.on;
      for (int t = 0; t < c.horizon; ++t) {
        EXPECT_GE(d.started(g, t), d.on(g, t) && !prev);
        const double lo = d.on(g, t) ? gen.p_min : 0.0;
        const double hi = d.on(g, t) ? gen.p_max : 0.0;
        EXPECT_GE(d.dispatch(g, t), lo - 1e-9);
        EXPECT_LE(d.dispatch(g, t), hi + 1e-9);
        prev = d.on(g, t);
      }
    }
    for (double a : d.alpha) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
    for (int t = 0; t < c.horizon; ++t) {
      double supply = 0.0;
      for (int g = 0; g < c.num_generators(); ++g) supply += d.dispatch(g, t);
      for (int m = 0; m < c.num_farms(); ++m) supply += d.ratio(m, t) * c.wind_farms[m].forecast[t];
      EXPECT_NEAR(supply, c.total_demand(t), 1e-6);
      for (int l = 0; l < c.num_lines(); ++l) {
        double flow = 0.0;
        for (int g = 0; g < c.num_generators(); ++g) flow += c.network.shift_factor(l, c.generators[g].bus) * d.dispatch(g, t);
        for (int m = 0; m < c.num_farms(); ++m) {
          flow += c.network.shift_factor(l, c.wind_farms[m].bus) * d.ratio(m, t) * c.wind_farms[m].forecast[t];
        }
        for (const auto& load : c.loads) flow -= c.network.shift_factor(l, load.bus) * load.demand[t];
        EXPECT_LE(std::abs(flow), c.network.lines[l].capacity + 1e-6);
      }
    }
    // The cost breakdown is the PWL objective evaluated at the decision.
    double cost = 0.0;
    for (int g = 0; g < c.num_generators(); ++g) {
      const auto& gen = c.generators[g];
      const auto pwl = piecewise_linearize(gen.cost, gen.p_min, gen.p_max, 4);
      for (int t = 0; t < c.horizon; ++t) {
        cost += gen.startup_cost * d.started(g, t);
        if (d.on(g, t)) cost += gen.no_load_cost + pwl(d.dispatch(g, t));
      }
    }
    EXPECT_NEAR(d.cost.total(), cost, 1e-6 * std::max(1.0, cost));
    EXPECT_NEAR(d.cost.uc() + d.cost.ed(), d.cost.total(), 1e-9);
  }
}

TEST(Master, BreakdownMatchesObjective) {
  const auto c = fixture::ramp_instance();
  const auto mm = build_master(c, CutPool{}, Mode::Wgc);
  const auto out = solve_master(mm, c, exact());
  ASSERT_TRUE(out.decision);
  EXPECT_NEAR(out.decision->cost.total(), out.result.objective, 1e-6);
  const auto polished = solve_master(mm, c, exact(), AlphaTieBreak::MaxCommit);
  ASSERT_TRUE(polished.decision);
  EXPECT_NEAR(polished.decision->cost.total(), out.result.objective, 1e-6);
}

TEST(Master, AlphaPolishCommitsAllAtNoCost) {
  auto c = fixture::ramp_instance();
  c.wind_farms[0].forecast = {0.0, 20.0};
  c.wind_farms[0].band_override = BandOverride{{0.0, 40.0}, {0.0, 10.0}};
  rebuild_bands(c);
  const auto mm = build_master(c, CutPool{}, Mode::Wgc);
  const auto out = solve_master(mm, c, exact(), AlphaTieBreak::MaxCommit);
  ASSERT_TRUE(out.decision);
  EXPECT_NEAR(out.decision->ratio(0, 1), 1.0, 1e-9);
  // alpha at a zero forecast and a zero band is pinned to 1.
  EXPECT_EQ(out.decision->ratio(0, 0), 1.0);
}

TEST(CutPool, RejectsDuplicates) {
  CutPool pool;
  auto v = UncertaintyRealization::zeros(2, 3);
  EXPECT_TRUE(pool.add(1, v));
  EXPECT_FALSE(pool.add(2, v));
  v.down[v.index(1, 2)] = 1;
  EXPECT_TRUE(pool.add(2, v));
  EXPECT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool[1].copy_id, "p[2]");
}

TEST(Realization, BudgetCheck) {
  auto v = UncertaintyRealization::zeros(2, 2);
  EXPECT_TRUE(v.satisfies_budgets(0, 0));
  v.up[v.index(0, 0)] = 1;
  EXPECT_FALSE(v.satisfies_budgets(0, 1));
  EXPECT_TRUE(v.satisfies_budgets(1, 1));
  v.down[v.index(1, 0)] = 1;
  EXPECT_FALSE(v.satisfies_budgets(1, 1));
  EXPECT_TRUE(v.satisfies_budgets(1, 2));
  v.down[v.index(0, 0)] = 1;
  EXPECT_FALSE(v.satisfies_budgets(2, 2));
}

TEST(Mode, Parse) {
  EXPECT_EQ(parse_mode("wgc"), Mode::Wgc);
  EXPECT_EQ(parse_mode("traditional"), Mode::Traditional);
  EXPECT_THROW(parse_mode("WGC"), InputError);
}

}  // namespace
