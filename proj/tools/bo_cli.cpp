// Batch driver for the bocontrol shared library.  Each subcommand selects a
// scenario; the optional JSON config supplies everything else (see README).
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bocontrol.h"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// The subcommand decides the scenario regardless of what the file says.
std::string with_scenario(const std::string& config, const std::string& scenario,
                          std::string* parse_error) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(config);
  } catch (const std::exception& e) {
    *parse_error = e.what();
    return {};
  }
  if (!j.is_object()) {
    *parse_error = "configuration must be a JSON object";
    return {};
  }
  j["scenario"] = scenario;
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral Benjamin-Ono stabilization and exact control"};
  app.set_version_flag("--version", std::string(bo_version()));
  app.require_subcommand(1);

  const char* scenarios[] = {"simulate",      "stabilize",       "control-linear",
                             "control-nonlinear", "observability", "viscosity-sweep",
                             "commutator-test"};
  const char* blurbs[] = {
      "integrate the (damped/viscous) evolution from the configured state",
      "closed-loop damping run with decay-rate fit",
      "HUM exact control of the damped linear flow",
      "fixed-point exact control of the full nonlinear flow",
      "report both sides of the observability inequality",
      "vanishing-viscosity sweep with trajectory distances",
      "commutator norm-ratio experiment",
  };

  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  bool verify = false;
  std::string chosen;

  for (size_t i = 0; i < 7; ++i) {
    CLI::App* sub = app.add_subcommand(scenarios[i], blurbs[i]);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--seed", seed, "override initial.seed");
    sub->add_option("--out", out_dir, "override output.directory");
    if (i == 2 || i == 3)
      sub->add_flag("--verify", verify, "re-integrate the serialized control record");
    sub->callback([&chosen, name = std::string(scenarios[i])]() { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);

  std::string config = "{}";
  try {
    if (!config_path.empty()) config = read_file(config_path);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::string parse_error;
  config = with_scenario(config, chosen, &parse_error);
  if (!parse_error.empty()) {
    std::cerr << "error: config: " << parse_error << "\n";
    return 2;
  }

  char* record = nullptr;
  const bo_status status =
      bo_run_scenario(config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), seed,
                      verify ? 1 : 0, &record);
  if (status != BO_OK) {
    std::cerr << "error: " << bo_last_error() << "\n";
    return static_cast<int>(status);
  }
  if (record) {
    std::fputs(record, stdout);
    bo_string_free(record);
  }
  return 0;
}
