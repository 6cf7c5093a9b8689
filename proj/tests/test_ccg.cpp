#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "ruc/ccg.hpp"

namespace {

using namespace ruc;

RucOptions exact(Mode mode) {
  RucOptions o;
  o.mode = mode;
  o.solver.relative_gap = 0.0;
  o.solver.absolute_gap = 1e-9;
  return o;
}

TEST(Ccg, NoWindConvergesAtOnce) {
  const auto c = fixture::single_unit(3, 120, true);
  const auto sol = solve_ruc(c, exact(Mode::Wgc));
  ASSERT_EQ(sol.status, RucStatus::Converged);
  ASSERT_EQ(sol.iterations.size(), 1u);
  EXPECT_EQ(sol.final_R, 0.0);
  const auto uc = solve_master(build_master(c, CutPool{}, Mode::Wgc), c, exact(Mode::Wgc).solver);
  EXPECT_NEAR(sol.cost().total(), uc.result.objective, 1e-6);
}

TEST(Ccg, RampTraceWgc) {
  const auto c = fixture::ramp_instance();
  const auto sol = solve_ruc(c);
  ASSERT_EQ(sol.status, RucStatus::Converged) << sol.message;
  ASSERT_EQ(sol.iterations.size(), 2u);
  const auto& first = sol.iterations[0];
  EXPECT_NEAR(first.R, 50.0, 1e-6);
  ASSERT_TRUE(first.v);
  EXPECT_TRUE(first.v->up_at(0, 1));
  EXPECT_EQ(first.v->deviations(), 1);
  EXPECT_LE(sol.iterations[1].R, 1e-4);
  EXPECT_LE(sol.decision->ratio(0, 1), 0.5 + 1e-6);
  EXPECT_LE(certify(c, sol, CertifyMethod::Dual).R, 1e-4);
  const auto enumerated = certify(c, sol, CertifyMethod::Enumeration);
  EXPECT_LE(enumerated.R, 1e-4);
  EXPECT_TRUE(enumerated.robust);
  EXPECT_EQ(enumerated.vectors, 5u);
}

TEST(Ccg, RampTraditionalHasNoSolution) {
  const auto c = fixture::ramp_instance();
  RucOptions o;
  o.mode = Mode::Traditional;
  const auto sol = solve_ruc(c, o);
  EXPECT_EQ(sol.status, RucStatus::RobustInfeasible);
  EXPECT_EQ(sol.iterations.size(), 2u);
  EXPECT_EQ(sol.iterations.back().master_status, milp::SolveStatus::Infeasible);
  EXPECT_FALSE(sol.converged());
}

TEST(Ccg, CorruptedAlphaIsCaught) {
  const auto c = fixture::ramp_instance();
  auto sol = solve_ruc(c);
  ASSERT_TRUE(sol.converged());
  for (auto& a : sol.decision->alpha) a = 1.0;
  EXPECT_NEAR(certify(c, sol, CertifyMethod::Dual).R, 50.0, 1e-6);
  const auto e = certify(c, sol, CertifyMethod::Enumeration);
  EXPECT_NEAR(e.R, 50.0, 1e-6);
  EXPECT_FALSE(e.robust);
}

TEST(Ccg, IterationLimit) {
  const auto c = fixture::ramp_instance();
  RucOptions o;
  o.max_iter = 1;
  const auto sol = solve_ruc(c, o);
  EXPECT_EQ(sol.status, RucStatus::IterationLimit);
  EXPECT_EQ(sol.iterations.size(), 1u);
}

TEST(Ccg, EnumerationCapAdvisesDual) {
  auto c = fixture::ramp_instance();
  auto sol = solve_ruc(c);
  EXPECT_THROW(certify(c, sol, CertifyMethod::Enumeration, {}, {}, 2), InputError);
}

TEST(Ccg, RandomTinyCasesAreSoundAndMonotone) {
  std::mt19937_64 rng(41);
  int converged_both = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = fixture::random_tiny_case(rng, 100);
    const auto vertices = EnumerationPlan::for_case(c).count();
    RucSolution by_mode[2];
    for (const Mode mode : {Mode::Wgc, Mode::Traditional}) {
      const auto sol = solve_ruc(c, exact(mode));
      ASSERT_NE(sol.status, RucStatus::Error) << sol.message;
      EXPECT_LE(sol.iterations.size(), vertices + 1);
      for (std::size_t k = 1; k < sol.iterations.size(); ++k) {
        const auto& now = sol.iterations[k];
        if (now.master_status == milp::SolveStatus::Infeasible) continue;
        const double before = sol.iterations[k - 1].master_objective;
        EXPECT_GE(now.master_objective, before - 1e-6 * std::max(1.0, std::abs(before)));
      }
      for (const auto& rec : sol.iterations) {
        if (rec.v) EXPECT_TRUE(rec.v->satisfies_budgets(c.uncertainty.gamma_t, c.uncertainty.gamma_s));
      }
      if (sol.converged()) {
        EXPECT_LE(sol.final_R, sol.epsilon_feas);
        EXPECT_LE(certify(c, sol, CertifyMethod::Enumeration).R, sol.epsilon_feas);
      }
      by_mode[mode == Mode::Wgc ? 0 : 1] = sol;
    }
    if (by_mode[1].converged()) {
      EXPECT_TRUE(by_mode[0].converged()) << "wgc can always fall back to alpha = 1";
      if (by_mode[0].converged()) {
        ++converged_both;
        EXPECT_LE(by_mode[0].cost().total(), by_mode[1].cost().total() + 1e-6 * std::max(1.0, by_mode[1].cost().total()));
      }
    }
  }
  EXPECT_GT(converged_both, 5);
}

TEST(Ccg, DeltaRStopReportsPlateau) {
  // Any case needing three or more iterations has R_2 > epsilon; a loose delta-R
  // rule must then stop right after the second subproblem.
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = fixture::random_tiny_case(rng, 100);
    const auto plain = solve_ruc(c, exact(Mode::Wgc));
    if (plain.iterations.size() < 3) continue;
    auto o = exact(Mode::Wgc);
    o.delta_r_stop = true;
    o.delta_r_epsilon = 1e9;
    const auto sol = solve_ruc(c, o);
    EXPECT_EQ(sol.status, RucStatus::Plateau);
    EXPECT_EQ(sol.iterations.size(), 2u);
    EXPECT_GT(sol.final_R, sol.epsilon_feas);
    return;
  }
  GTEST_SKIP() << "no random case needed three iterations";
}

}  // namespace
