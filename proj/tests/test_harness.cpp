#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "bo/errors.hpp"
#include "bo/harness.hpp"

using namespace bo;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("bo_harness_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ScenarioConfig dispersion_config(const std::string& out_dir) {
  ScenarioConfig c;
  c.scenario = Scenario::kSimulate;
  c.grid_m = 128;
  c.epsilon = 0.0;
  c.alpha = 0.0;
  c.horizon = 1.0;
  c.dt = 1e-3;
  c.damping_on = false;
  c.initial.kind = InitialConfig::Kind::kModes;
  c.initial.mode_list = {{2, 1.0, 0.0}};
  c.out_directory = out_dir;
  return c;
}

}  // namespace

TEST_CASE("random initial data is seeded, normalized, and mean free") {
  const SpectralField a = random_initial(7, 2.0, 0.5, 42);
  const SpectralField b = random_initial(7, 2.0, 0.5, 42);
  const SpectralField c = random_initial(8, 2.0, 0.5, 42);
  double diff_ab = 0.0, diff_ac = 0.0;
  for (int k = -42; k <= 42; ++k) {
    diff_ab = std::max(diff_ab, std::abs(a.coeff(k) - b.coeff(k)));
    diff_ac = std::max(diff_ac, std::abs(a.coeff(k) - c.coeff(k)));
  }
  CHECK(diff_ab == 0.0);
  CHECK(diff_ac > 1e-3);
  CHECK(std::abs(a.sobolev_norm(0.5) - 2.0) < 1e-12);
  CHECK(a.coeff(0) == Complex(0.0, 0.0));
}

TEST_CASE("config JSON round trip and defaults") {
  const std::string text = R"({
    "scenario": "stabilize",
    "grid": {"M": 64},
    "physics": {"epsilon": 0.01, "alpha": 1.0, "T": 2.5, "dt": "auto"},
    "damping": {"center": 3.0, "width": 2.0, "law": "lo"},
    "initial": {"kind": "random", "seed": 9, "target_norm": 0.5},
    "output": {"directory": "somewhere", "formats": ["csv"], "stride": 4}
  })";
  const ScenarioConfig c = ScenarioConfig::from_json_text(text);
  CHECK(c.scenario == Scenario::kStabilize);
  CHECK(c.grid_m == 64);
  CHECK(c.epsilon == 0.01);
  CHECK(c.horizon == 2.5);
  CHECK(!c.dt);
  CHECK(c.damping_law == DampingLaw::kGG);
  CHECK(c.initial.kind == InitialConfig::Kind::kRandom);
  CHECK(*c.initial.seed == 9);
  CHECK(c.stride == 4);

  const ScenarioConfig back = ScenarioConfig::from_json_text(c.to_json_text());
  CHECK(back.scenario == c.scenario);
  CHECK(back.grid_m == c.grid_m);
  CHECK(back.damping_width == c.damping_width);
}

TEST_CASE("config validation failures carry field paths") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      ScenarioConfig::from_json_text(text);
      FAIL_CHECK("expected validation error for ", needle);
    } catch (const validation_error& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error(R"({"scenario": "warp"})", "scenario");
  expect_error(R"({"grid": {"M": 100}})", "grid.M");
  expect_error(R"({"physics": {"epsilon": 2.0}})", "physics.epsilon");
  expect_error(R"({"physics": {"dt": -0.1}})", "physics.dt");
  expect_error(R"({"damping": {"width": 7.0}})", "damping.width");
  expect_error(R"({"initial": {"kind": "random"}})", "initial.seed");
  expect_error(R"({"output": {"stride": 0}})", "output.stride");
  expect_error(R"({"nonsense": 1})", "nonsense");
}

TEST_CASE("simulate scenario reproduces the dispersion phase in its outputs") {
  const fs::path dir = fresh_dir("simulate");
  const ScenarioConfig c = dispersion_config(dir.string());
  const RunRecord record = run_scenario(c);

  CHECK(fs::exists(record.record_path));
  for (const auto& [name, path] : record.outputs) CHECK(fs::exists(path));

  const SpectralField last = read_field_json((dir / "final_state.json").string());
  SpectralField expect = SpectralField::harmonic(last.truncation(), 2, 1.0, -4.0);
  expect -= last;
  CHECK(expect.l2_norm() < 1e-8);

  const std::string csv = slurp((dir / "trajectory.csv").string());
  CHECK(csv.rfind("t,l2_norm,hs_norm,I1,I2,eps_dissipation_cum,"
                  "damping_dissipation_cum,smoothing_budget_cum,energy_residual\n",
                  0) == 0);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  ScenarioConfig c;
  c.scenario = Scenario::kStabilize;
  c.grid_m = 128;
  c.alpha = 1.0;
  c.horizon = 1.0;
  c.dt = 2e-3;
  c.initial.kind = InitialConfig::Kind::kRandom;
  c.initial.seed = 7;
  c.initial.target_norm = 1.0;
  c.stride = 10;

  const fs::path dir1 = fresh_dir("det1");
  const fs::path dir2 = fresh_dir("det2");
  c.out_directory = dir1.string();
  run_scenario(c);
  c.out_directory = dir2.string();
  run_scenario(c);

  CHECK(slurp((dir1 / "trajectory.csv").string()) ==
        slurp((dir2 / "trajectory.csv").string()));
  CHECK(slurp((dir1 / "final_state.json").string()) ==
        slurp((dir2 / "final_state.json").string()));
}

TEST_CASE("stabilize record reports a decay fit and monotone dissipation") {
  const fs::path dir = fresh_dir("stab");
  ScenarioConfig c;
  c.scenario = Scenario::kStabilize;
  c.horizon = 8.0;
  c.initial.kind = InitialConfig::Kind::kRandom;
  c.initial.seed = 3;
  c.out_directory = dir.string();
  c.stride = 20;
  run_scenario(c);
  const json record = json::parse(slurp((dir / "run_record.json").string()));
  CHECK(record.at("reports").at("l2_nonincreasing").get<bool>());
  CHECK(record.at("reports").at("decay_fit").at("rate").get<double>() > 0.0);
  CHECK(record.at("artifact_version").get<std::string>() == "0.1.0");
}

TEST_CASE("linear control scenario writes a verifiable solution") {
  const fs::path dir = fresh_dir("ctl");
  ScenarioConfig c;
  c.scenario = Scenario::kControlLinear;
  c.grid_m = 32;
  c.horizon = 1.0;
  c.dt = 2e-3;
  c.initial.kind = InitialConfig::Kind::kZero;
  c.target.kind = InitialConfig::Kind::kModes;
  c.target.mode_list = {{1, 0.1, 0.0}};
  c.control_s = 0.0;
  c.out_directory = dir.string();
  c.verify = true;
  run_scenario(c);

  const json sol = json::parse(slurp((dir / "solution.json").string()));
  for (const char* field : {"vT_seed", "k", "cg_iterations", "cg_residual",
                            "picard_iterations", "terminal_error"})
    CHECK(sol.contains(field));
  CHECK(sol.at("terminal_error").get<double>() <= 1e-6);
  CHECK(sol.at("picard_iterations").get<int>() == 0);

  // The out-of-band re-integration agrees with the solver's own verification.
  const json record = json::parse(slurp((dir / "run_record.json").string()));
  const double reported = record.at("reports").at("terminal_error").get<double>();
  const double reverified = record.at("reports").at("verified_terminal_error").get<double>();
  CHECK(std::abs(reported - reverified) < 1e-12);

  // Round trip of the control record itself.
  const ForcingRecord k = read_control_record_json((dir / "solution.json").string());
  CHECK(k.half_nodes() == sol.at("k").size());
}

TEST_CASE("observability and sweep scenarios emit their reports") {
  {
    const fs::path dir = fresh_dir("obs");
    ScenarioConfig c;
    c.scenario = Scenario::kObservability;
    c.horizon = 0.5;
    c.dt = 2e-3;
    c.initial.kind = InitialConfig::Kind::kRandom;
    c.initial.seed = 5;
    c.out_directory = dir.string();
    run_scenario(c);
    const json rep = json::parse(slurp((dir / "observability.json").string()));
    CHECK(rep.at("ratio").get<double>() > 0.0);
    CHECK(!rep.at("degenerate").get<bool>());
  }
  {
    const fs::path dir = fresh_dir("sweep");
    ScenarioConfig c;
    c.scenario = Scenario::kViscositySweep;
    c.horizon = 0.5;
    c.dt = 2e-3;
    c.eps_list = {1e-1, 1e-2, 1e-3};
    c.initial.kind = InitialConfig::Kind::kRandom;
    c.initial.seed = 5;
    c.initial.sobolev_s = 2.0;
    c.out_directory = dir.string();
    run_scenario(c);
    const json rep = json::parse(slurp((dir / "sweep.json").string()));
    CHECK(rep.at("entries").size() == 3);
    CHECK(rep.at("successive_distances").size() == 2);
  }
}

TEST_CASE("commutator scenario reports bounded and growing ratios") {
  const fs::path dir = fresh_dir("comm");
  ScenarioConfig c;
  c.scenario = Scenario::kCommutatorTest;
  c.initial.seed = 1;
  c.out_directory = dir.string();
  run_scenario(c);
  const json rep = json::parse(slurp((dir / "commutator.json").string()));
  for (const auto& entry : rep.at("admissible"))
    CHECK(entry.at("max_growth_factor").get<double>() < 1.1);
  const auto& probes = rep.at("counterexample").at("probes");
  CHECK(probes.size() >= 3);
  for (const auto& probe : probes)
    CHECK(probe.at("ratio_over_2m").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("field JSON round trip") {
  const fs::path dir = fresh_dir("fieldio");
  const SpectralField f = random_initial(11, 1.0, 0.0, 10);
  const std::string path = (dir / "f.json").string();
  write_field_json(f, path);
  const SpectralField back = read_field_json(path);
  REQUIRE(back.truncation() == f.truncation());
  for (int k = -10; k <= 10; ++k) CHECK(back.coeff(k) == f.coeff(k));
}
