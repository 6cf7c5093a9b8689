#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "ruc/gaussian.hpp"
#include "ruc/system_model.hpp"

namespace {

using namespace ruc;

// z with P(|X| <= z) = coverage, by bisection on the closed-form CDF.
double bisect_two_sided(double coverage) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erf(mid / std::sqrt(2.0)) < coverage ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Line flows from B theta = P solved by partial-pivot Gaussian elimination.
std::vector<double> dc_flows(const Network& net, const std::vector<double>& injection) {
  const int n = static_cast<int>(net.buses.size());
  const int ref = static_cast<int>(*net.bus_index(net.reference_bus));
  std::vector<int> keep;
  for (int i = 0; i < n; ++i)
    if (i != ref) keep.push_back(i);
  const int k = n - 1;
  std::vector<std::vector<double>> a(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k + 1), 0.0));
  auto pos = [&](int bus) {
    for (int i = 0; i < k; ++i)
      if (keep[static_cast<std::size_t>(i)] == bus) return i;
    return -1;
  };
  for (const auto& l : net.lines) {
    const int f = static_cast<int>(*net.bus_index(l.from));
    const int t = static_cast<int>(*net.bus_index(l.to));
    const double y = 1.0 / l.reactance;
    const int pf = pos(f), pt = pos(t);
    if (pf >= 0) a[pf][pf] += y;
    if (pt >= 0) a[pt][pt] += y;
    if (pf >= 0 && pt >= 0) {
      a[pf][pt] -= y;
      a[pt][pf] -= y;
    }
  }
  for (int i = 0; i < k; ++i) a[i][k] = injection[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])];
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int j = col; j <= k; ++j) a[r][j] -= f * a[col][j];
    }
  }
  std::vector<double> theta(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < k; ++i) theta[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] = a[i][k] / a[i][i];
  std::vector<double> flow;
  for (const auto& l : net.lines) {
    flow.push_back((theta[*net.bus_index(l.from)] - theta[*net.bus_index(l.to)]) / l.reactance);
  }
  return flow;
}

Network random_network(std::mt19937_64& rng) {
  Network net;
  const int n = fixture::uniform_int(rng, 2, 8);
  for (int b = 1; b <= n; ++b) net.buses.push_back(10 * b);
  net.reference_bus = net.buses[static_cast<std::size_t>(fixture::uniform_int(rng, 0, n - 1))];
  int id = 0;
  for (int b = 1; b < n; ++b) {
    const int parent = fixture::uniform_int(rng, 0, b - 1);
    net.lines.push_back({"l" + std::to_string(++id), net.buses[static_cast<std::size_t>(parent)],
                         net.buses[static_cast<std::size_t>(b)], fixture::uniform(rng, 0.01, 0.5), 100.0});
  }
  const int extra = fixture::uniform_int(rng, 0, n);
  for (int e = 0; e < extra; ++e) {
    const int a = fixture::uniform_int(rng, 0, n - 1);
    const int b = fixture::uniform_int(rng, 0, n - 1);
    if (a == b) continue;
    net.lines.push_back({"l" + std::to_string(++id), net.buses[static_cast<std::size_t>(a)],
                         net.buses[static_cast<std::size_t>(b)], fixture::uniform(rng, 0.01, 0.5), 100.0});
  }
  return net;
}

TEST(Quantile, MatchesBisection) {
  for (double cov : {0.5, 0.8, 0.9, 0.95, 0.99, 0.999, 0.999999}) {
    EXPECT_NEAR(two_sided_quantile(cov), bisect_two_sided(cov), 1e-9) << cov;
  }
  EXPECT_NEAR(two_sided_quantile(0.99), 2.5758, 1e-4);
}

TEST(Quantile, TailsAndDomain) {
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.7, 0.99, 1 - 1e-9}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12 + 1e-9 * p);
  }
  EXPECT_THROW(two_sided_quantile(1.0), std::domain_error);
  EXPECT_THROW(normal_quantile(-0.1), std::domain_error);
}

WindFarm farm(double forecast, double capacity, double sigma, int T) {
  WindFarm w;
  w.id = "W";
  w.capacity = capacity;
  w.forecast.assign(static_cast<std::size_t>(T), forecast);
  w.sigma_base = sigma;
  return w;
}

TEST(Bands, LastPeriodDoublesSigma) {
  const int T = 24;
  const auto b = build_uncertainty_bands(farm(100, 500, 0.15, T), T, 0.99);
  const double z = bisect_two_sided(0.99);
  EXPECT_NEAR(b.sigma[T - 1], 30.0, 1e-12);
  EXPECT_NEAR(b.upper[T - 1], 100 + 30 * z, 1e-9);
  EXPECT_NEAR(b.lower[T - 1], 100 - 30 * z, 1e-9);
  EXPECT_NEAR(b.upper[T - 1], 177.3, 0.05);
  EXPECT_NEAR(b.lower[T - 1], 22.7, 0.05);
}

TEST(Bands, ZeroForecastCollapses) {
  const auto b = build_uncertainty_bands(farm(0, 500, 0.3, 6), 6, 0.99);
  for (int t = 0; t < 6; ++t) {
    EXPECT_EQ(b.sigma[t], 0.0);
    EXPECT_EQ(b.upper[t], 0.0);
    EXPECT_EQ(b.lower[t], 0.0);
  }
}

TEST(Bands, ClampedToCapacityAndZero) {
  const auto b = build_uncertainty_bands(farm(480, 500, 0.8, 4), 4, 0.99);
  for (int t = 0; t < 4; ++t) {
    EXPECT_EQ(b.upper[t], 500.0);
    EXPECT_EQ(b.lower[t], 0.0);
  }
}

TEST(Bands, NestedAndNondecreasingInTime) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = fixture::uniform_int(rng, 1, 24);
    const double cap = fixture::uniform(rng, 10, 600);
    WindFarm w = farm(0, cap, fixture::uniform(rng, 0, 0.5), T);
    for (auto& x : w.forecast) x = fixture::uniform(rng, 0, cap);
    const auto b = build_uncertainty_bands(w, T, fixture::uniform(rng, 0.5, 0.999));
    for (int t = 0; t < T; ++t) {
      EXPECT_LE(0.0, b.lower[t]);
      EXPECT_LE(b.lower[t], w.forecast[t]);
      EXPECT_LE(w.forecast[t], b.upper[t]);
      EXPECT_LE(b.upper[t], cap);
    }
  }
  const auto flat = build_uncertainty_bands(farm(50, 500, 0.1, 12), 12, 0.95);
  for (int t = 1; t < 12; ++t) EXPECT_GE(flat.sigma[t], flat.sigma[t - 1]);
}

TEST(Bands, CapacityScaling) {
  const auto b = build_uncertainty_bands(farm(100, 400, 0.1, 3), 3, 0.99, SigmaScaling::Capacity);
  EXPECT_NEAR(b.sigma[2], 0.1 * 400 * 2.0, 1e-12);
}

TEST(Bands, NonFiniteForecastRejected) {
  auto w = farm(100, 400, 0.1, 3);
  w.forecast[1] = std::nan("");
  EXPECT_THROW(build_uncertainty_bands(w, 3, 0.99), InputError);
}

TEST(Ptdf, TwoBusSingleLine) {
  Network net;
  net.buses = {1, 2};
  net.reference_bus = 1;
  net.lines = {{"a", 2, 1, 0.1, 10}};
  const auto p = compute_ptdf(net);
  EXPECT_NEAR(p(0, 1), 1.0, 1e-12);
  EXPECT_EQ(p(0, 0), 0.0);
}

TEST(Ptdf, Triangle) {
  Network net;
  net.buses = {1, 2, 3};
  net.reference_bus = 3;
  net.lines = {{"12", 1, 2, 0.1, 10}, {"23", 2, 3, 0.1, 10}, {"13", 1, 3, 0.1, 10}};
  const auto p = compute_ptdf(net);
  EXPECT_NEAR(p(2, 0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p(0, 0), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(p(1, 0), 1.0 / 3.0, 1e-12);
  for (int l = 0; l < 3; ++l) EXPECT_EQ(p(l, 2), 0.0);
}

TEST(Ptdf, AgreesWithDirectDcSolve) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto net = random_network(rng);
    const auto ptdf = compute_ptdf(net);
    const auto n = net.buses.size();
    std::vector<double> inj(n);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) sum += inj[i] = fixture::uniform(rng, -100, 100);
    inj[n - 1] = -sum;
    const auto direct = dc_flows(net, inj);
    double scale = 0.0;
    for (double f : direct) scale = std::max(scale, std::abs(f));
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      double f = 0.0;
      for (std::size_t i = 0; i < n; ++i) f += ptdf(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) * inj[i];
      EXPECT_NEAR(f, direct[l], 1e-8 * std::max(1.0, scale));
    }
    const auto ref = *net.bus_index(net.reference_bus);
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      EXPECT_EQ(ptdf(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(ref)), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_LE(std::abs(ptdf(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i))), 1.0 + 1e-9);
      }
    }
  }
}

TEST(Ptdf, RejectsDisconnectedOrZeroReactance) {
  Network net;
  net.buses = {1, 2, 3};
  net.reference_bus = 1;
  net.lines = {{"a", 1, 2, 0.1, 10}};
  EXPECT_THROW(compute_ptdf(net), InputError);
  net.lines.push_back({"b", 2, 3, 0.0, 10});
  EXPECT_THROW(compute_ptdf(net), InputError);
}

TEST(Pwl, SquareOnZeroTwo) {
  const auto pwl = piecewise_linearize({1.0, 0.0}, 0.0, 2.0, 2);
  ASSERT_EQ(pwl.breakpoints.size(), 3u);
  EXPECT_DOUBLE_EQ(pwl.breakpoints[1], 1.0);
  EXPECT_DOUBLE_EQ(pwl.slopes[0], 1.0);
  EXPECT_DOUBLE_EQ(pwl.slopes[1], 3.0);
}

TEST(Pwl, SingleSegmentSecant) {
  const auto pwl = piecewise_linearize({2.0, 5.0}, 10.0, 20.0, 1);
  ASSERT_EQ(pwl.segments(), 1);
  EXPECT_DOUBLE_EQ(pwl.slopes[0], 65.0);
  EXPECT_DOUBLE_EQ(pwl.intercept, 250.0);
}

TEST(Pwl, LinearCostExact) {
  const auto pwl = piecewise_linearize({0.0, 17.5}, 30.0, 130.0, 5);
  for (double s : pwl.slopes) EXPECT_NEAR(s, 17.5, 1e-12);
  for (double p = 30; p <= 130; p += 7.3) EXPECT_NEAR(pwl(p), 17.5 * p, 1e-9);
}

TEST(Pwl, ConvexOverestimateWithinBound) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const QuadraticCost q{fixture::uniform(rng, 0, 0.1), fixture::uniform(rng, 0, 40)};
    const double lo = fixture::uniform(rng, 0, 100);
    const double hi = lo + fixture::uniform(rng, 1, 400);
    const int K = fixture::uniform_int(rng, 1, 8);
    const auto pwl = piecewise_linearize(q, lo, hi, K);
    for (int k = 1; k < K; ++k) EXPECT_GE(pwl.slopes[k], pwl.slopes[k - 1]);
    for (double b : pwl.breakpoints) EXPECT_NEAR(pwl(b), q(b), 1e-9 * std::max(1.0, q(b)));
    const double h = (hi - lo) / K;
    for (int i = 0; i < 1000; ++i) {
      const double p = fixture::uniform(rng, lo, hi);
      EXPECT_GE(pwl(p), q(p) - 1e-9 * std::max(1.0, q(p)));
      EXPECT_LE(pwl(p) - q(p), q.a * h * h / 4 + 1e-9 * std::max(1.0, q(p)));
    }
  }
}

TEST(Pwl, DegenerateAndConcave) {
  const auto pt = piecewise_linearize({0.01, 10}, 50, 50, 4);
  EXPECT_EQ(pt.breakpoints.size(), 1u);
  EXPECT_EQ(pt.segments(), 0);
  EXPECT_DOUBLE_EQ(pt(50), 0.01 * 2500 + 500);
  EXPECT_THROW(piecewise_linearize({-0.01, 10}, 0, 10, 2), InputError);
}

TEST(Validate, WellFormedCaseIsClean) {
  EXPECT_TRUE(validate_case(fixture::single_unit(3, 100, true)).empty());
}

TEST(Validate, ShortLoadProfile) {
  auto c = fixture::single_unit(3, 100, true);
  c.loads[0].demand.pop_back();
  const auto diags = validate_case(c);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].severity, Severity::Error);
  EXPECT_NE(diags[0].message.find("L1"), std::string::npos);
  EXPECT_NE(diags[0].message.find('3'), std::string::npos);
}

TEST(Validate, GammaAboveHorizon) {
  auto c = fixture::single_unit(3, 100, true);
  c.uncertainty.gamma_t = 4;
  const auto diags = validate_case(c);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].path, "/uncertainty/gamma_t");
}

TEST(Validate, CapacityShortfallIsWarning) {
  auto c = fixture::single_unit(2, 250, false);
  const auto diags = validate_case(c);
  ASSERT_FALSE(diags.empty());
  EXPECT_EQ(diags.back().severity, Severity::Warning);
  EXPECT_FALSE(has_errors(diags));
}

}  // namespace
