#ifndef BO_HARNESS_HPP
#define BO_HARNESS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bo/control.hpp"
#include "bo/dynamics.hpp"
#include "bo/spectral.hpp"

namespace bo {

enum class Scenario {
  kSimulate,
  kStabilize,
  kControlLinear,
  kControlNonlinear,
  kObservability,
  kViscositySweep,
  kCommutatorTest,
};

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct ModeListEntry {
  int k = 1;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct InitialConfig {
  enum class Kind { kZero, kRandom, kModes, kFile };
  Kind kind = Kind::kZero;
  std::optional<std::uint64_t> seed;
  double target_norm = 1.0;
  double sobolev_s = 0.0;
  std::vector<ModeListEntry> mode_list;
  std::string file;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::kSimulate;
  // grid
  std::size_t grid_m = 128;
  // physics
  double epsilon = 0.0;
  double alpha = 1.0;
  double horizon = 1.0;
  std::optional<double> dt;                 // absent -> auto (CFL rule)
  std::vector<double> eps_list;             // viscosity-sweep entries
  // damping
  bool damping_on = true;
  double damping_center = 3.14159265358979323846;
  double damping_width = 3.14159265358979323846;
  DampingLaw damping_law = DampingLaw::kGDG;
  // initial / target states
  InitialConfig initial;
  InitialConfig target;
  // control
  double control_s = 0.0;
  double cg_tol = 1e-8;
  int max_iter = 500;
  double picard_tol = 1e-9;
  int max_picard = 50;
  double delta = 1e-2;
  bool allow_s_outside_range = false;
  // output
  std::string out_directory = "out";
  std::vector<std::string> formats = {"csv", "json"};
  int stride = 1;
  bool verify = false;

  /// Parses the documented JSON layout; unknown keys and malformed values
  /// raise validation_error with a field-path message.
  static ScenarioConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

/// Seeded random zero-mean field: coefficient variance ~ (1+k^2)^(-s-1),
/// Hermitian-symmetrized and rescaled to the exact requested H^s norm.
SpectralField random_initial(std::uint64_t seed, double target_norm, double sobolev_s,
                             int truncation);

struct RunRecord {
  std::string scenario;
  std::string record_path;                       // run_record.json
  std::map<std::string, std::string> outputs;    // logical name -> path
  double wall_clock_seconds = 0.0;
};

/// Dispatches a scenario, writes its outputs under the configured directory
/// and returns the record; deterministic given (config, seed).
RunRecord run_scenario(const ScenarioConfig& config);

/// Writes the ledger as CSV with the documented column set.
void write_trajectory_csv(const Trajectory& traj, const std::string& path, int stride);

/// {"truncation": K, "coefficients": [[re, im], ...]} for k = -K..K.
void write_field_json(const SpectralField& f, const std::string& path);
SpectralField read_field_json(const std::string& path);

void write_control_solution_json(const ControlSolution& sol, const std::string& path);

/// Reads the control record back from a solution file (used by --verify).
ForcingRecord read_control_record_json(const std::string& path);

}  // namespace bo

#endif
