#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "ruc/oracle.hpp"
#include "ruc/subproblem.hpp"

namespace {

using namespace ruc;

FirstStageDecision all_on(const SystemCase& c, double alpha) {
  FirstStageDecision d;
  d.generators = c.num_generators();
  d.farms = c.num_farms();
  d.periods = c.horizon;
  d.u.assign(static_cast<std::size_t>(d.generators * d.periods), 1);
  d.z.assign(d.u.size(), 0);
  d.p_hat.assign(d.u.size(), 0.0);
  d.alpha.assign(static_cast<std::size_t>(d.farms * d.periods), alpha);
  return d;
}

UncertaintyRealization up_at(const SystemCase& c, int m, int t) {
  auto v = UncertaintyRealization::zeros(c.num_farms(), c.horizon);
  v.up[v.index(m, t)] = 1;
  return v;
}

// One farm with forecast 100 and the 0.99 band of a 30 MW standard deviation.
SystemCase banded_farm() {
  auto c = fixture::single_unit(1, 100, true);
  WindFarm w;
  w.id = "W1";
  w.bus = 1;
  w.capacity = 300;
  w.forecast = {100.0};
  w.band_override = BandOverride{{177.3}, {22.7}};
  c.wind_farms.push_back(w);
  rebuild_bands(c);
  return c;
}

TEST(RealizedWind, WorkedExamples) {
  const auto c = banded_farm();
  auto v = UncertaintyRealization::zeros(1, 1);
  EXPECT_DOUBLE_EQ(realized_wind(c, std::vector<double>{0.7}, v)[0], 70.0);
  v.up[0] = 1;
  EXPECT_NEAR(realized_wind(c, std::vector<double>{1.0}, v)[0], 177.3, 1e-12);
  v.up[0] = 0;
  v.down[0] = 1;
  EXPECT_NEAR(realized_wind(c, std::vector<double>{0.5}, v)[0], 11.35, 1e-12);
  v.up[0] = 1;
  EXPECT_THROW(realized_wind(c, std::vector<double>{0.5}, v), InputError);
}

TEST(RealizedWind, StaysWithinScaledCapacity) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = fixture::random_tiny_case(rng);
    std::vector<double> alpha;
    for (int i = 0; i < c.num_farms() * c.horizon; ++i) alpha.push_back(fixture::uniform(rng, 0, 1));
    for_each_realization(EnumerationPlan::for_case(c), [&](const UncertaintyRealization& v) {
      const auto w = realized_wind(c, alpha, v);
      for (int m = 0; m < c.num_farms(); ++m) {
        for (int t = 0; t < c.horizon; ++t) {
          const auto i = v.index(m, t);
          EXPECT_GE(w[i], 0.0);
          EXPECT_LE(w[i], alpha[i] * c.wind_farms[m].capacity + 1e-9);
        }
      }
      return true;
    });
  }
}

TEST(RecourseLp, RampInstance) {
  const auto c = fixture::ramp_instance();
  const auto d = all_on(c, 1.0);
  EXPECT_NEAR(*recourse_optimum(c, d, realized_wind(c, d, up_at(c, 0, 1))), 50.0, 1e-7);
  EXPECT_NEAR(*recourse_optimum(c, d, realized_wind(c, d, UncertaintyRealization::zeros(1, 2))), 0.0, 1e-9);
  const auto half = all_on(c, 0.5);
  EXPECT_NEAR(*recourse_optimum(c, half, realized_wind(c, half, up_at(c, 0, 1))), 0.0, 1e-9);
}

TEST(RecourseLp, NoLoadMeansCurtailmentOnly) {
  auto c = banded_farm();
  c.generators[0].p_min = 0.0;
  c.generators[0].initial.p0 = 0.0;
  c.loads[0].demand = {0.0};
  auto d = all_on(c, 1.0);
  const auto lp = build_recourse_lp(c, d, std::vector<double>{60.0});
  const auto r = milp::solve(lp.model);
  ASSERT_EQ(r.status, milp::SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, 60.0, 1e-7);
  EXPECT_NEAR(r.value(lp.dw[0]), 60.0, 1e-7);
  EXPECT_EQ(r.value(lp.dD[0]), 0.0);
}

TEST(RecourseLp, InfeasibleReportedAsNullopt) {
  auto c = banded_farm();
  c.loads[0].demand = {0.0};
  c.generators[0].p_min = 50.0;
  c.generators[0].initial.p0 = 50.0;
  EXPECT_FALSE(recourse_optimum(c, all_on(c, 1.0), std::vector<double>{10.0}));
}

TEST(DualSubproblem, RampInstanceWorstCase) {
  const auto c = fixture::ramp_instance();
  const auto r = solve_subproblem(c, all_on(c, 1.0));
  EXPECT_NEAR(r.R, 50.0, 1e-6);
  EXPECT_EQ(r.v, up_at(c, 0, 1));
  EXPECT_TRUE(r.bounds.saturated.empty());
  EXPECT_NEAR(r.dual_objective, 50.0, 1e-6);
}

TEST(DualSubproblem, ZeroBudgetsGiveNominal) {
  std::mt19937_64 rng(17);
  int seen = 0;
  while (seen < 5) {
    auto c = fixture::random_tiny_case(rng);
    c.uncertainty.gamma_t = 0;
    c.uncertainty.gamma_s = 0;
    const auto d = fixture::random_first_stage(c, rng);
    if (!d) continue;
    ++seen;
    const auto r = solve_subproblem(c, *d);
    EXPECT_TRUE(r.v.is_zero());
    EXPECT_NEAR(r.R, *recourse_optimum(c, *d, realized_wind(c, *d, r.v)), 1e-6);
  }
}

TEST(DualSubproblem, StrongDualityAtFixedRealization) {
  std::mt19937_64 rng(23);
  int checked = 0;
  int positive = 0;
  while (checked < 150) {
    const auto c = fixture::random_tiny_case(rng, 60);
    const auto d = fixture::random_first_stage(c, rng);
    if (!d) continue;
    const auto form = compile_recourse(c);
    for (const auto& v : enumerate_realizations(EnumerationPlan::for_case(c))) {
      auto ds = build_dual_subproblem(c, form, *d, 1e5);
      fix_realization(ds, v);
      const auto dual = milp::solve(ds.model);
      ASSERT_EQ(dual.status, milp::SolveStatus::Optimal);
      const double primal = *recourse_optimum(c, *d, realized_wind(c, *d, v));
      EXPECT_NEAR(dual.objective, primal, 1e-6 * std::max(1.0, primal));
      if (primal > 1e-6) ++positive;
      ++checked;
    }
  }
  EXPECT_GT(positive, 10) << "the random corpus should produce binding cases";
}

TEST(DualSubproblem, EnvelopesAreExactAtTheMilpOptimum) {
  std::mt19937_64 rng(29);
  int cases = 0;
  while (cases < 20) {
    const auto c = fixture::random_tiny_case(rng);
    const auto d = fixture::random_first_stage(c, rng);
    if (!d) continue;
    ++cases;
    const auto ds = build_dual_subproblem(c, *d, 1e4);
    const auto r = milp::solve(ds.model);
    ASSERT_TRUE(r.has_solution());
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
      const double lam = r.value(ds.lambda[i]);
      for (const auto& [j, g] : ds.gamma[i]) {
        const double vj = r.value(ds.v[static_cast<std::size_t>(j)]);
        EXPECT_NEAR(r.value(g), lam * vj, 1e-6) << ds.rows[i].name;
      }
    }
  }
}

TEST(DualSubproblem, WeakDualityAndBudgets) {
  std::mt19937_64 rng(31);
  int cases = 0;
  while (cases < 20) {
    const auto c = fixture::random_tiny_case(rng);
    const auto d = fixture::random_first_stage(c, rng);
    if (!d) continue;
    ++cases;
    const auto r = solve_subproblem(c, *d);
    EXPECT_TRUE(r.v.satisfies_budgets(c.uncertainty.gamma_t, c.uncertainty.gamma_s));
    EXPECT_GE(r.R, 0.0);
    EXPECT_LE(r.dual_objective, r.R + 1e-6 * std::max(1.0, r.R));
    if (r.bounds.saturated.empty()) EXPECT_NEAR(r.dual_objective, r.R, 1e-6 * std::max(1.0, r.R));
  }
}

TEST(DualSubproblem, MonotoneInBudgets) {
  std::mt19937_64 rng(37);
  int cases = 0;
  while (cases < 12) {
    auto c = fixture::random_tiny_case(rng);
    const auto d = fixture::random_first_stage(c, rng);
    if (!d) continue;
    ++cases;
    double prev = -1.0;
    for (int gt = 0; gt <= c.horizon; ++gt) {
      c.uncertainty.gamma_t = gt;
      c.uncertainty.gamma_s = c.num_farms();
      const double r = solve_subproblem(c, *d).R;
      EXPECT_GE(r, prev - 1e-6);
      prev = r;
    }
    prev = -1.0;
    for (int gs = 0; gs <= c.num_farms(); ++gs) {
      c.uncertainty.gamma_t = c.horizon;
      c.uncertainty.gamma_s = gs;
      const double r = solve_subproblem(c, *d).R;
      EXPECT_GE(r, prev - 1e-6);
      prev = r;
    }
  }
}

TEST(DualSubproblem, SmallBigMIsGrown) {
  const auto c = fixture::ramp_instance();
  SubproblemOptions opt;
  opt.big_m = 0.25;
  const auto r = solve_subproblem(c, all_on(c, 1.0), {}, opt);
  EXPECT_NEAR(r.R, 50.0, 1e-6);
  EXPECT_GT(r.bounds.big_m, 0.25);
  EXPECT_GT(r.bounds.attempts, 1);
}

TEST(DualSubproblem, InfeasibleRecourseIsAnError) {
  auto c = fixture::ramp_instance();
  c.loads[0].demand = {150.0, 20.0};
  EXPECT_THROW(solve_subproblem(c, all_on(c, 1.0)), SolverError);
}

TEST(DualSubproblem, NamingContract) {
  const auto c = fixture::ramp_instance();
  const auto ds = build_dual_subproblem(c, all_on(c, 1.0), 1e4);
  for (const char* n : {"vu[W1,1]", "vl[W1,2]"}) EXPECT_TRUE(ds.model.find_variable(n)) << n;
  bool lam = false, gam = false;
  for (const auto& v : ds.model.variables()) {
    lam = lam || v.name.rfind("lam[", 0) == 0;
    gam = gam || v.name.rfind("gam[", 0) == 0;
  }
  EXPECT_TRUE(lam);
  EXPECT_TRUE(gam);
}

}  // namespace
