#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "ruc/case_io.hpp"
#include "ruc/reporting.hpp"

namespace {

using namespace ruc;
namespace fs = std::filesystem;

const fs::path kData = RUC_DATA_DIR;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ruc_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json ramp_doc() { return read_json_file(kData / "ramp_instance.json"); }

TEST(LoadCase, BundledIeeeCase) {
  const auto cf = load_case_file(kData / "ieee39_wind.json");
  EXPECT_TRUE(cf.warnings.empty());
  EXPECT_TRUE(validate_case(cf.system).empty());
  const auto& c = cf.system;
  EXPECT_EQ(c.num_generators(), 10);
  EXPECT_EQ(c.num_lines(), 46);
  ASSERT_EQ(c.num_farms(), 1);
  EXPECT_EQ(c.wind_farms[0].capacity, 500.0);
  EXPECT_EQ(c.wind_farms[0].bus, 29);
  EXPECT_EQ(c.horizon, 24);
}

TEST(LoadCase, RampCaseMatchesFixture) {
  const auto a = load_case(kData / "ramp_instance.json");
  const auto b = fixture::ramp_instance();
  EXPECT_EQ(a.bands[0].upper, b.bands[0].upper);
  EXPECT_EQ(a.bands[0].lower, b.bands[0].lower);
  EXPECT_EQ(a.generators[0].ramp_down, b.generators[0].ramp_down);
}

TEST(LoadCase, MissingGammaNamesKey) {
  auto doc = ramp_doc();
  doc["uncertainty"].erase("gamma_t");
  try {
    parse_case(doc);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("/uncertainty/gamma_t"), std::string::npos) << e.what();
  }
}

TEST(LoadCase, WrongType) {
  auto doc = ramp_doc();
  doc["system"]["generators"][0]["p_max"] = "big";
  try {
    parse_case(doc);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("/system/generators/0/p_max"), std::string::npos) << e.what();
  }
}

TEST(LoadCase, ShortCsvNamesFile) {
  const auto dir = scratch_dir("csv");
  {
    std::ofstream csv(dir / "load.csv");
    csv << "period,L1\n";
    for (int t = 1; t <= 23; ++t) csv << t << ",100\n";
  }
  auto doc = ramp_doc();
  doc["profiles"]["horizon"] = 24;
  doc["profiles"].erase("load");
  doc["profiles"]["load_csv"] = "load.csv";
  try {
    parse_case(doc, dir);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("load.csv"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(LoadCase, CsvProfilesLoad) {
  const auto dir = scratch_dir("csv_ok");
  {
    std::ofstream csv(dir / "load.csv");
    csv << "period,L1\n1,150\n2,140\n";
  }
  auto doc = ramp_doc();
  doc["profiles"].erase("load");
  doc["profiles"]["load_csv"] = "load.csv";
  const auto cf = parse_case(doc, dir);
  EXPECT_EQ(cf.system.loads[0].demand, (std::vector<double>{150, 140}));
  fs::remove_all(dir);
}

TEST(LoadCase, InvalidCaseRejectedWithPath) {
  auto doc = ramp_doc();
  doc["uncertainty"]["gamma_t"] = 5;
  try {
    parse_case(doc);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("gamma_t"), std::string::npos);
  }
}

TEST(Penetration, ScalesForecastCapacityAndBands) {
  const auto base = load_case(kData / "ieee39_wind.json");
  const auto c = scale_penetration(base, 1.2);
  EXPECT_NEAR(c.wind_farms[0].capacity, 600.0, 1e-9);
  for (int t = 0; t < c.horizon; ++t) {
    EXPECT_NEAR(c.wind_farms[0].forecast[t], 1.2 * base.wind_farms[0].forecast[t], 1e-9);
    EXPECT_NEAR(c.bands[0].upper[t] - c.wind_farms[0].forecast[t],
                std::min(1.2 * (base.bands[0].upper[t] - base.wind_farms[0].forecast[t]),
                         600.0 - c.wind_farms[0].forecast[t]),
                1e-6);
  }
  EXPECT_THROW(scale_penetration(base, 0.0), InputError);
}

FirstStageDecision with_alpha(const SystemCase& c, std::vector<double> alpha) {
  FirstStageDecision d;
  d.generators = c.num_generators();
  d.farms = c.num_farms();
  d.periods = c.horizon;
  d.u.assign(static_cast<std::size_t>(d.generators * d.periods), 1);
  d.z.assign(d.u.size(), 0);
  d.p_hat.assign(d.u.size(), 0.0);
  d.alpha = std::move(alpha);
  return d;
}

SystemCase flat_farm(int T, double forecast, double delta) {
  auto c = fixture::single_unit(T, 300, true);
  WindFarm w;
  w.id = "W1";
  w.bus = 1;
  w.capacity = 400;
  w.forecast.assign(static_cast<std::size_t>(T), forecast);
  w.price_coefficient.assign(static_cast<std::size_t>(T), delta);
  w.sigma_base = 0.1;
  c.wind_farms.push_back(w);
  rebuild_bands(c);
  return c;
}

TEST(WindBenefit, WorkedValues) {
  const auto c = flat_farm(24, 100, 1.0);
  EXPECT_NEAR(wind_benefit(with_alpha(c, std::vector<double>(24, 0.9)), c)[0], 240.0, 1e-9);
  EXPECT_EQ(wind_benefit(with_alpha(c, std::vector<double>(24, 1.0)), c)[0], 0.0);
  EXPECT_NEAR(wind_benefit(with_alpha(c, std::vector<double>(24, 0.0)), c)[0], 2400.0, 1e-9);
}

TEST(RampCapability, WorkedValues) {
  auto c = flat_farm(2, 100, 0.0);
  const auto r = ramp_capability(with_alpha(c, {1.0, 0.5}), c);
  EXPECT_EQ(r.delta[0], 0.0);
  EXPECT_NEAR(r.delta[1], -50.0, 1e-12);
  EXPECT_NEAR(r.avg_delta_down, 50.0, 1e-12);

  c.bands[0].upper = {150.0, 150.0};
  const auto h = ramp_capability(with_alpha(c, {0.5, 0.5}), c);
  EXPECT_NEAR(h.headroom_up[0], 25.0, 1e-12);

  const auto flat = ramp_capability(with_alpha(c, {1.0, 1.0}), c);
  for (double x : flat.delta) EXPECT_EQ(x, 0.0);
}

TEST(Study, EmptyMultiplierList) {
  const auto bundle = run_study({}, fixture::ramp_instance());
  EXPECT_TRUE(bundle.runs.empty());
  EXPECT_EQ(cost_table_csv({}), "penetration_pct,mode,status,total,uc,ed,iterations,final_R\n");
}

TEST(Study, RampFamilyFrontier) {
  StudyConfig cfg;
  cfg.multipliers = {1.0, 0.5, 1.0};
  const auto base = fixture::ramp_instance();
  const auto bundle = run_study(cfg, base);
  ASSERT_EQ(bundle.runs.size(), 4u);
  EXPECT_EQ(bundle.runs[0].multiplier, 0.5);
  std::vector<CostRow> rows;
  for (const auto& r : bundle.runs) rows.push_back(cost_row(r.mode, r.multiplier, r.solution));
  // At half penetration both modes commit fully; at full penetration only wgc survives.
  EXPECT_TRUE(bundle.runs[0].solution.converged());
  EXPECT_TRUE(bundle.runs[1].solution.converged());
  EXPECT_TRUE(bundle.runs[2].solution.converged());
  EXPECT_EQ(bundle.runs[3].solution.status, RucStatus::RobustInfeasible);
  EXPECT_LE(rows[0].cost->total(), rows[1].cost->total() * (1 + 2e-3));
  const auto text = cost_table_text(rows);
  std::size_t count = 0;
  for (auto p = text.find("No Solution"); p != std::string::npos; p = text.find("No Solution", p + 1)) ++count;
  EXPECT_EQ(count, 1u);
  for (const auto& r : rows) {
    if (r.cost) EXPECT_NEAR(r.cost->uc() + r.cost->ed(), r.cost->total(), 1e-6 * r.cost->total());
  }
  for (const auto& run : bundle.runs) {
    if (!run.solution.decision) continue;
    const auto c = scale_penetration(base, run.multiplier);
    for (int t = 0; t < c.horizon; ++t) {
      EXPECT_LE(run.solution.decision->ratio(0, t) * c.wind_farms[0].forecast[t], c.wind_farms[0].forecast[t] + 1e-12);
    }
  }
}

TEST(Study, ReportsAreByteIdentical) {
  StudyConfig cfg;
  cfg.multipliers = {0.5, 1.0};
  const auto base = fixture::ramp_instance();
  const auto a = scratch_dir("study_a");
  const auto b = scratch_dir("study_b");
  write_study(run_study(cfg, base), base, a);
  write_study(run_study(cfg, base), base, b);
  std::set<std::string> seen;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename().string();
    seen.insert(name);
    if (name == "timing.csv") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
  }
  EXPECT_TRUE(seen.count("cost_table.csv"));
  EXPECT_TRUE(seen.count("wind_series.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(SolutionFile, FirstStageRoundTrips) {
  const auto c = fixture::ramp_instance();
  const auto sol = solve_ruc(c);
  ASSERT_TRUE(sol.converged());
  const auto doc = Json::parse(solution_json(c, sol).dump());
  const auto d = read_first_stage(doc, c);
  EXPECT_EQ(d.u, sol.decision->u);
  EXPECT_EQ(d.z, sol.decision->z);
  EXPECT_EQ(d.alpha, sol.decision->alpha);
  EXPECT_EQ(d.p_hat, sol.decision->p_hat);
  EXPECT_EQ(solution_json(c, sol).dump(2), solution_json(c, solve_ruc(c)).dump(2));
}

}  // namespace
