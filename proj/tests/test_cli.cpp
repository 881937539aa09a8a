#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path write_config(const std::string& tag, const std::string& text) {
  const fs::path path = fs::temp_directory_path() / ("bo_cli_" + tag + ".json");
  std::ofstream out(path);
  out << text;
  return path;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("bo_cli_" + tag);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("successful simulate run") {
  const fs::path dir = fresh_dir("ok");
  const fs::path cfg = write_config("ok", R"({
    "physics": {"alpha": 0.0, "T": 0.2, "dt": 0.001},
    "damping": "off",
    "initial": {"kind": "modes", "mode_list": [{"k": 2, "amplitude": 1.0}]}
  })");
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "final_state.json"));
  CHECK(fs::exists(dir / "run_record.json"));
}

TEST_CASE("validation failures exit with 2") {
  const fs::path cfg = write_config("bad", R"({"physics": {"epsilon": 3.0}})");
  CHECK(run_cli("simulate --config " + cfg.string()) == 2);
  CHECK(run_cli("stabilize --config /nonexistent/path.json") == 2);
}

TEST_CASE("solver divergence exits with 3") {
  const fs::path dir = fresh_dir("blow");
  const fs::path cfg = write_config("blow", R"({
    "physics": {"alpha": 1.0, "T": 5.0, "dt": 0.05},
    "damping": "off",
    "initial": {"kind": "random", "seed": 43, "target_norm": 80.0}
  })");
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + dir.string()) == 3);
}

TEST_CASE("control non-convergence exits with 4") {
  const fs::path dir = fresh_dir("stuck");
  const fs::path cfg = write_config("stuck", R"({
    "grid": {"M": 32},
    "physics": {"T": 1.0, "dt": 0.002},
    "target": {"kind": "modes", "mode_list": [{"k": 1, "amplitude": 0.1}]},
    "control": {"max_iter": 2, "cg_tol": 1e-14}
  })");
  CHECK(run_cli("control-linear --config " + cfg.string() + " --out " + dir.string()) == 4);
}

TEST_CASE("seeded runs are byte-identical") {
  const fs::path dir1 = fresh_dir("det1");
  const fs::path dir2 = fresh_dir("det2");
  const fs::path cfg = write_config("det", R"({
    "physics": {"T": 1.0, "dt": 0.002},
    "initial": {"kind": "random", "seed": 7, "target_norm": 1.0},
    "output": {"stride": 10}
  })");
  const std::string base = "stabilize --config " + cfg.string() + " --seed 7 --out ";
  REQUIRE(run_cli(base + dir1.string()) == 0);
  REQUIRE(run_cli(base + dir2.string()) == 0);
  CHECK(slurp(dir1 / "trajectory.csv") == slurp(dir2 / "trajectory.csv"));
  CHECK(slurp(dir1 / "final_state.json") == slurp(dir2 / "final_state.json"));
}

TEST_CASE("verify flag re-checks the control solution") {
  const fs::path dir = fresh_dir("verify");
  const fs::path cfg = write_config("verify", R"({
    "grid": {"M": 32},
    "physics": {"T": 1.0, "dt": 0.002},
    "target": {"kind": "modes", "mode_list": [{"k": 1, "amplitude": 0.1}]}
  })");
  REQUIRE(run_cli("control-linear --config " + cfg.string() + " --out " + dir.string() +
                  " --verify") == 0);
  const json record = json::parse(slurp(dir / "run_record.json"));
  CHECK(record.at("reports").contains("verified_terminal_error"));
  CHECK(record.at("reports").at("verified_terminal_error").get<double>() < 1e-6);
}
