#include <gtest/gtest.h>

#include <Highs.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "fixtures.hpp"
#include "ruc/master_problem.hpp"
#include "ruc/milp/export.hpp"
#include "ruc/milp/highs_backend.hpp"
#include "ruc/milp/solve.hpp"

namespace {

using namespace ruc::milp;

TEST(Solve, LowerBoundActive) {
  ModelBuilder m;
  const auto x = m.add_continuous("x", -kInfinity, kInfinity);
  m.add_constraint("lo", x, RowSense::GreaterEqual, 3.0);
  m.add_constraint("hi", x, RowSense::LessEqual, 10.0);
  m.set_objective(ObjectiveSense::Minimize, x);
  const auto r = solve(m);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.value(x), 3.0, 1e-9);
  EXPECT_NEAR(r.objective, 3.0, 1e-9);
}

TEST(Solve, Infeasible) {
  ModelBuilder m;
  const auto x = m.add_continuous("x", -kInfinity, kInfinity);
  m.add_constraint("a", x, RowSense::LessEqual, 1.0);
  m.add_constraint("b", x, RowSense::GreaterEqual, 2.0);
  m.set_objective(ObjectiveSense::Minimize, LinearExpr{});
  const auto r = solve(m);
  EXPECT_EQ(r.status, SolveStatus::Infeasible);
  EXPECT_FALSE(r.has_solution());
}

TEST(Solve, BinaryRoundsDown) {
  ModelBuilder m;
  const auto x = m.add_binary("x");
  m.add_constraint("half", x, RowSense::LessEqual, 0.5);
  m.set_objective(ObjectiveSense::Maximize, x);
  const auto r = solve(m);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.value(x), 0.0);
}

TEST(Solve, Unbounded) {
  ModelBuilder m;
  const auto x = m.add_continuous("x");
  m.set_objective(ObjectiveSense::Maximize, x);
  const auto r = solve(m);
  EXPECT_EQ(r.status, SolveStatus::Unbounded);
}

TEST(Solve, NoObjectiveOrUnknownBackend) {
  ModelBuilder m;
  m.add_continuous("x");
  EXPECT_EQ(solve(m).status, SolveStatus::Error);
  m.set_objective(ObjectiveSense::Minimize, LinearExpr{});
  SolverParams p;
  p.backend = "nope";
  const auto r = solve(m, p);
  EXPECT_EQ(r.status, SolveStatus::Error);
  EXPECT_NE(r.message.find("nope"), std::string::npos);
}

// Claims optimality at a point that breaks a row.
class LyingBackend final : public Backend {
 public:
  [[nodiscard]] std::string_view name() const override { return "liar"; }
  [[nodiscard]] SolveResult run(const ModelBuilder& model, const SolverParams&) const override {
    SolveResult r;
    r.status = SolveStatus::Optimal;
    r.objective = 0.0;
    r.values = std::vector<double>(model.num_variables(), 0.0);
    return r;
  }
};

TEST(Solve, CheckerRejectsBadPoint) {
  register_backend("liar", [] { return std::make_unique<LyingBackend>(); });
  ModelBuilder m;
  const auto x = m.add_continuous("x");
  m.add_constraint("need", x, RowSense::GreaterEqual, 1.0);
  m.set_objective(ObjectiveSense::Minimize, x);
  SolverParams p;
  p.backend = "liar";
  const auto r = solve(m, p);
  EXPECT_EQ(r.status, SolveStatus::Error);
  EXPECT_FALSE(r.has_solution());
  EXPECT_NE(r.message.find("need"), std::string::npos);
}

TEST(Model, RejectsDuplicatesAndForeignVars) {
  ModelBuilder m;
  m.add_continuous("x");
  EXPECT_THROW(m.add_continuous("x"), std::invalid_argument);
  EXPECT_THROW(m.add_variable("y", VarKind::Continuous, 2.0, 1.0), std::invalid_argument);
  ModelBuilder other;
  other.add_continuous("a");
  const auto b = other.add_continuous("b");
  EXPECT_THROW(m.add_constraint("c", b, RowSense::LessEqual, 1.0), std::invalid_argument);
}

TEST(Model, ExpressionConstantsMoveToRhs) {
  ModelBuilder m;
  const auto x = m.add_continuous("x");
  const auto y = m.add_continuous("y");
  LinearExpr lhs = x + y + 4.0;
  lhs.add(x, 2.0);
  m.add_constraint("r", lhs, RowSense::LessEqual, y - 1.0);
  const auto& row = m.constraints().front();
  EXPECT_DOUBLE_EQ(row.rhs, -5.0);
  ASSERT_EQ(row.terms.size(), 1u);
  EXPECT_DOUBLE_EQ(row.terms.front().coef, 3.0);
}

ModelBuilder knapsack() {
  ModelBuilder m("knap");
  const auto a = m.add_binary("a[1]");
  const auto b = m.add_binary("b[1,2]");
  const auto c = m.add_continuous("c", 0.0, 4.0);
  const auto f = m.add_continuous("free", -kInfinity, kInfinity);
  const auto k = m.add_continuous("fixed", 2.0, 2.0);
  m.add_constraint("cap", 3 * a + 4 * b + c, RowSense::LessEqual, 6.0);
  m.add_constraint("link", f - c, RowSense::Equal, 1.0);
  m.add_constraint("floor", a + c + k, RowSense::GreaterEqual, 2.5);
  LinearExpr obj = 5 * a + 6 * b + 1.5 * c;
  obj.add(f, -0.25);
  obj.add(k, 1.0);
  obj.add_constant(7.0);
  m.set_objective(ObjectiveSense::Maximize, obj);
  return m;
}

double highs_file_objective(const std::string& text, const std::string& ext) {
  const auto path = std::filesystem::temp_directory_path() / ("ruc_roundtrip_" + std::to_string(::getpid()) + ext);
  std::ofstream(path) << text;
  Highs h;
  h.setOptionValue("output_flag", false);
  EXPECT_EQ(h.readModel(path.string()), HighsStatus::kOk) << text;
  EXPECT_EQ(h.run(), HighsStatus::kOk);
  EXPECT_EQ(h.getModelStatus(), HighsModelStatus::kOptimal);
  std::filesystem::remove(path);
  return h.getInfo().objective_function_value;
}

TEST(Export, RoundTripsThroughHighsReader) {
  const auto m = knapsack();
  const auto r = solve(m);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(highs_file_objective(export_model(m, ExportFormat::LpText), ".lp"), r.objective, 1e-7);
  EXPECT_NEAR(highs_file_objective(export_model(m, ExportFormat::Mps), ".mps"), r.objective, 1e-7);
}

TEST(Export, MasterRoundTrips) {
  const auto c = ruc::fixture::ramp_instance();
  ruc::CutPool pool;
  auto v = ruc::UncertaintyRealization::zeros(1, 2);
  v.up[1] = 1;
  pool.add(1, v);
  const auto mm = ruc::build_master(c, pool, ruc::Mode::Wgc);
  SolverParams exact;
  exact.relative_gap = 0.0;
  const auto r = solve(mm.model, exact);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(highs_file_objective(export_model(mm.model, ExportFormat::LpText), ".lp"), r.objective, 1e-6);
  EXPECT_NEAR(highs_file_objective(export_model(mm.model, ExportFormat::Mps), ".mps"), r.objective, 1e-6);
}

TEST(Export, EmptyConstraintModel) {
  ModelBuilder m;
  const auto x = m.add_continuous("x", 0.0, 3.0);
  m.set_objective(ObjectiveSense::Minimize, x);
  const auto lp = export_model(m, ExportFormat::LpText);
  EXPECT_NE(lp.find("Minimize"), std::string::npos);
  EXPECT_NE(lp.find("Bounds"), std::string::npos);
  EXPECT_EQ(lp.find("Subject To"), std::string::npos);
}

TEST(Export, EqualityRow) {
  ModelBuilder m;
  const auto x = m.add_continuous("x");
  m.add_constraint("eq", 2 * x, RowSense::Equal, 4.0);
  m.set_objective(ObjectiveSense::Minimize, x);
  const auto lp = export_model(m, ExportFormat::LpText);
  EXPECT_NE(lp.find(" eq: 2 x = 4"), std::string::npos) << lp;
  const auto mps = export_model(m, ExportFormat::Mps);
  EXPECT_NE(mps.find(" E  eq"), std::string::npos) << mps;
}

TEST(Export, Deterministic) {
  const auto a = knapsack();
  const auto b = knapsack();
  EXPECT_EQ(export_model(a, ExportFormat::LpText), export_model(a, ExportFormat::LpText));
  EXPECT_EQ(export_model(a, ExportFormat::LpText), export_model(b, ExportFormat::LpText));
  EXPECT_EQ(export_model(a, ExportFormat::Mps), export_model(b, ExportFormat::Mps));
}

TEST(Checker, RandomLpsSatisfyRows) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    ModelBuilder m;
    std::vector<Var> x;
    const int n = ruc::fixture::uniform_int(rng, 2, 6);
    for (int j = 0; j < n; ++j) {
      x.push_back(j % 2 ? m.add_binary("b" + std::to_string(j)) : m.add_continuous("x" + std::to_string(j), 0, 10));
    }
    for (int i = 0; i < 4; ++i) {
      LinearExpr e;
      for (const auto& v : x) e.add(v, ruc::fixture::uniform(rng, -3, 3));
      m.add_constraint("r" + std::to_string(i), e, RowSense::LessEqual, ruc::fixture::uniform(rng, 1, 8));
    }
    LinearExpr obj;
    for (const auto& v : x) obj.add(v, ruc::fixture::uniform(rng, -2, 2));
    m.set_objective(ObjectiveSense::Minimize, obj);
    const auto r = solve(m);
    if (!r.has_solution()) continue;
    EXPECT_LE(check_feasibility(m, *r.values).max_violation, 1e-6);
  }
}

}  // namespace
