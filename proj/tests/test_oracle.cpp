#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <array>
#include <set>
#include <vector>

#include "fixtures.hpp"
#include "ruc/ccg.hpp"
#include "ruc/oracle.hpp"

namespace {

using namespace ruc;

// Counts budget-feasible vectors by trying all 2^(2MT) bit patterns.
std::uint64_t brute_force_count(int M, int T, int gt, int gs) {
  const int n = M * T;
  std::uint64_t count = 0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << (2 * n)); ++bits) {
    const std::uint64_t up = bits & ((std::uint64_t{1} << n) - 1);
    const std::uint64_t down = bits >> n;
    if (up & down) continue;
    const std::uint64_t any = up | down;
    bool ok = true;
    for (int m = 0; m < M && ok; ++m) {
      int used = 0;
      for (int t = 0; t < T; ++t) used += (any >> (m * T + t)) & 1U;
      ok = used <= gt;
    }
    for (int t = 0; t < T && ok; ++t) {
      int used = 0;
      for (int m = 0; m < M; ++m) used += (any >> (m * T + t)) & 1U;
      ok = used <= gs;
    }
    if (ok) ++count;
  }
  return count;
}

TEST(Enumeration, WorkedCounts) {
  EXPECT_EQ((EnumerationPlan{1, 2, 1, 1}.count()), 5u);
  EXPECT_EQ((EnumerationPlan{3, 4, 0, 2}.count()), 1u);
  EXPECT_EQ((EnumerationPlan{2, 1, 1, 1}.count()), 5u);
  EXPECT_EQ(enumerate_realizations({1, 2, 1, 1}).size(), 5u);
  EXPECT_EQ(enumerate_realizations({2, 1, 1, 1}).size(), 5u);
}

TEST(Enumeration, CountMatchesBruteForce) {
  for (int M = 1; M <= 3; ++M) {
    for (int T = 1; M * T <= 6; ++T) {
      for (int gt = 0; gt <= T; ++gt) {
        for (int gs = 0; gs <= M; ++gs) {
          const EnumerationPlan plan{M, T, gt, gs};
          const auto expected = brute_force_count(M, T, gt, gs);
          EXPECT_EQ(plan.count(), expected) << M << " " << T << " " << gt << " " << gs;
          std::uint64_t streamed = 0;
          for_each_realization(plan, [&](const UncertaintyRealization&) {
            ++streamed;
            return true;
          });
          EXPECT_EQ(streamed, expected);
        }
      }
    }
  }
}

TEST(Enumeration, LargerPlanesAgainstBruteForce) {
  // M*T up to 12; the 4^12 sweep is only done for a few budget pairs.
  for (const auto [M, T, gt, gs] : std::vector<std::array<int, 4>>{{1, 12, 3, 1}, {2, 6, 2, 1}, {3, 4, 2, 2}, {4, 3, 1, 2}, {6, 2, 2, 3}}) {
    EXPECT_EQ((EnumerationPlan{M, T, gt, gs}.count()), brute_force_count(M, T, gt, gs));
  }
}

TEST(Enumeration, UniqueFeasibleZeroFirst) {
  const EnumerationPlan plan{2, 3, 2, 1};
  const auto all = enumerate_realizations(plan);
  ASSERT_FALSE(all.empty());
  EXPECT_TRUE(all.front().is_zero());
  std::set<std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>> seen;
  for (const auto& v : all) {
    EXPECT_TRUE(v.satisfies_budgets(2, 1));
    EXPECT_TRUE(seen.emplace(v.up, v.down).second);
  }
}

TEST(Enumeration, CapExceeded) {
  const EnumerationPlan plan{3, 24, 8, 3};
  try {
    enumerate_realizations(plan, 1000);
    FAIL() << "expected the cap to trigger";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(plan.count())), std::string::npos);
  }
}

TEST(WorstCase, RampInstance) {
  const auto c = fixture::ramp_instance();
  FirstStageDecision d;
  d.generators = 1;
  d.farms = 1;
  d.periods = 2;
  d.u = {1, 1};
  d.z = {0, 0};
  d.p_hat = {150, 150};
  d.alpha = {1, 1};
  const auto r = worst_case_by_enumeration(c, d);
  EXPECT_EQ(r.vectors, 5u);
  EXPECT_NEAR(r.R, 50.0, 1e-7);
  EXPECT_TRUE(r.v.up_at(0, 1));
  EXPECT_EQ(r.v.deviations(), 1);

  const auto wider = worst_case_by_enumeration(fixture::ramp_instance(2, 1), d);
  EXPECT_GE(wider.R, r.R - 1e-9);
}

TEST(WorstCase, InfeasibleRealizationNamed) {
  auto c = fixture::ramp_instance();
  c.loads[0].demand = {150.0, 20.0};
  FirstStageDecision d{1, 1, 2, {1, 1}, {0, 0}, {150, 150}, {1, 1}, {}};
  try {
    worst_case_by_enumeration(c, d);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("{nominal}"), std::string::npos) << e.what();
  }
}

TEST(OracleEquivalence, RandomTinyCases) {
  std::mt19937_64 rng(2024);
  int cases = 0;
  while (cases < 25) {
    const auto c = fixture::random_tiny_case(rng);
    const auto d = fixture::random_first_stage(c, rng);
    if (!d) continue;
    ++cases;
    const double dual = solve_subproblem(c, *d).R;
    const double enumerated = worst_case_by_enumeration(c, *d).R;
    EXPECT_NEAR(dual, enumerated, 1e-5) << "case " << cases;
  }
}

TEST(MonteCarlo, ZeroSigmaMeansNoSlack) {
  auto c = fixture::ramp_instance();
  c.wind_farms[0].band_override.reset();
  c.wind_farms[0].forecast = {20.0, 30.0};
  c.wind_farms[0].sigma_base = 0.0;
  rebuild_bands(c);
  FirstStageDecision d{1, 1, 2, {1, 1}, {0, 0}, {130, 120}, {1, 1}, {}};
  const auto s = monte_carlo_evaluate(c, d, 50, 3);
  EXPECT_EQ(s.max_slack, 0.0);
  EXPECT_EQ(s.violation_rate, 0.0);
}

TEST(MonteCarlo, SameSeedSameStats) {
  const auto c = fixture::ramp_instance();
  FirstStageDecision d{1, 1, 2, {1, 1}, {0, 0}, {150, 150}, {1, 1}, {}};
  const auto a = monte_carlo_evaluate(c, d, 300, 99);
  const auto b = monte_carlo_evaluate(c, d, 300, 99);
  EXPECT_EQ(a.max_slack, b.max_slack);
  EXPECT_EQ(a.mean_slack, b.mean_slack);
  EXPECT_EQ(a.violation_rate, b.violation_rate);
  EXPECT_EQ(a.seed, 99u);
  const auto other = monte_carlo_evaluate(c, d, 300, 100);
  EXPECT_GE(other.violation_rate, 0.0);
  EXPECT_LE(other.violation_rate, 1.0);
}

TEST(MonteCarlo, SamplesStayInsideTruncation) {
  std::mt19937_64 rng(5);
  int at_edge = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = truncated_normal(rng, 90.0, 20.0, 0.0, 100.0);
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 100.0);
    if (x == 0.0 || x == 100.0) ++at_edge;
  }
  EXPECT_EQ(at_edge, 0) << "truncation must not pile mass on the bounds";
}

TEST(MonteCarlo, TruncatedMeanMatchesClosedForm) {
  std::mt19937_64 rng(6);
  const double mu = 90, sigma = 20, lo = 0, hi = 100;
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += truncated_normal(rng, mu, sigma, lo, hi);
  const double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
  auto pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::acos(-1.0)); };
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double mean = mu + sigma * (pdf(a) - pdf(b)) / (cdf(b) - cdf(a));
  EXPECT_NEAR(sum / n, mean, 0.1);
}

TEST(MonteCarlo, ConvergedRampCommitmentRate) {
  // The upper edge at t=2 is the 0.995 quantile on a zero forecast. At ratio 0.5
  // the unit follows 150 - 0.5 x only down to 100 MW, so slack appears once the
  // draw x exceeds 100 MW: P = (1 - Phi(100 / sigma)) / (1 - Phi(0)).
  const auto c = fixture::ramp_instance();
  RucOptions opt;
  const auto sol = solve_ruc(c, opt);
  ASSERT_TRUE(sol.converged());
  const double sigma = c.bands[0].sigma[1];
  const double tail = 0.5 * std::erfc(100.0 / sigma / std::sqrt(2.0));
  const double expected = tail / 0.5;
  const int n = 10000;
  const auto s = monte_carlo_evaluate(c, *sol.decision, n, 1);
  const double sd = std::sqrt(expected * (1 - expected) / n);
  EXPECT_NEAR(s.violation_rate, expected, 4 * sd);
  EXPECT_EQ(s.infeasible, 0);
}

}  // namespace
