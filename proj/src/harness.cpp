#include "bo/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "bo/diagnostics.hpp"
#include "bo/errors.hpp"
#include "bo/version.hpp"

namespace bo {

namespace {

using nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw validation_error(path + ": " + message);
}

double require_number(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int require_int(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string require_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

InitialConfig parse_state(const ordered_json& j, const std::string& path) {
  InitialConfig c;
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      const std::string kind = require_string(value, path + ".kind");
      if (kind == "zero") c.kind = InitialConfig::Kind::kZero;
      else if (kind == "random") c.kind = InitialConfig::Kind::kRandom;
      else if (kind == "modes") c.kind = InitialConfig::Kind::kModes;
      else if (kind == "file") c.kind = InitialConfig::Kind::kFile;
      else fail(path + ".kind", "must be zero|random|modes|file");
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer())
        fail(path + ".seed", "expected an integer");
      c.seed = value.get<std::uint64_t>();
    } else if (key == "target_norm") {
      c.target_norm = require_number(value, path + ".target_norm");
    } else if (key == "sobolev_s") {
      c.sobolev_s = require_number(value, path + ".sobolev_s");
    } else if (key == "mode_list") {
      if (!value.is_array()) fail(path + ".mode_list", "expected an array");
      for (std::size_t i = 0; i < value.size(); ++i) {
        const auto& e = value[i];
        const std::string epath = path + ".mode_list[" + std::to_string(i) + "]";
        if (!e.is_object()) fail(epath, "expected an object {k, amplitude, phase}");
        ModeListEntry m;
        m.k = require_int(e.at("k"), epath + ".k");
        m.amplitude = require_number(e.at("amplitude"), epath + ".amplitude");
        if (e.contains("phase")) m.phase = require_number(e.at("phase"), epath + ".phase");
        c.mode_list.push_back(m);
      }
    } else if (key == "file") {
      c.file = require_string(value, path + ".file");
    } else {
      fail(path + "." + key, "unknown field");
    }
  }
  if (c.kind == InitialConfig::Kind::kRandom && !c.seed)
    fail(path + ".seed", "seed is required when kind = random");
  if (c.kind == InitialConfig::Kind::kRandom && c.target_norm <= 0.0)
    fail(path + ".target_norm", "must be positive");
  if (c.kind == InitialConfig::Kind::kModes && c.mode_list.empty())
    fail(path + ".mode_list", "must not be empty when kind = modes");
  if (c.kind == InitialConfig::Kind::kFile && c.file.empty())
    fail(path + ".file", "must name a coefficient file when kind = file");
  return c;
}

ordered_json state_to_json(const InitialConfig& c) {
  ordered_json j;
  switch (c.kind) {
    case InitialConfig::Kind::kZero: j["kind"] = "zero"; break;
    case InitialConfig::Kind::kRandom: j["kind"] = "random"; break;
    case InitialConfig::Kind::kModes: j["kind"] = "modes"; break;
    case InitialConfig::Kind::kFile: j["kind"] = "file"; break;
  }
  if (c.seed) j["seed"] = *c.seed;
  j["target_norm"] = c.target_norm;
  j["sobolev_s"] = c.sobolev_s;
  if (!c.mode_list.empty()) {
    ordered_json list = ordered_json::array();
    for (const ModeListEntry& m : c.mode_list)
      list.push_back({{"k", m.k}, {"amplitude", m.amplitude}, {"phase", m.phase}});
    j["mode_list"] = list;
  }
  if (!c.file.empty()) j["file"] = c.file;
  return j;
}

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kSimulate: return "simulate";
    case Scenario::kStabilize: return "stabilize";
    case Scenario::kControlLinear: return "control-linear";
    case Scenario::kControlNonlinear: return "control-nonlinear";
    case Scenario::kObservability: return "observability";
    case Scenario::kViscositySweep: return "viscosity-sweep";
    case Scenario::kCommutatorTest: return "commutator-test";
  }
  throw validation_error("unknown scenario enum value");
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "simulate") return Scenario::kSimulate;
  if (name == "stabilize") return Scenario::kStabilize;
  if (name == "control-linear") return Scenario::kControlLinear;
  if (name == "control-nonlinear") return Scenario::kControlNonlinear;
  if (name == "observability") return Scenario::kObservability;
  if (name == "viscosity-sweep") return Scenario::kViscositySweep;
  if (name == "commutator-test") return Scenario::kCommutatorTest;
  throw validation_error("scenario: unknown scenario '" + name + "'");
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw validation_error(std::string("config: invalid JSON (") + e.what() + ")");
  }
  if (!root.is_object()) throw validation_error("config: expected a JSON object");

  ScenarioConfig c;
  for (const auto& [key, value] : root.items()) {
    if (key == "scenario") {
      c.scenario = scenario_from_name(require_string(value, "scenario"));
    } else if (key == "grid") {
      if (!value.is_object()) fail("grid", "expected an object");
      for (const auto& [gk, gv] : value.items()) {
        if (gk == "M") {
          const int m = require_int(gv, "grid.M");
          if (m < 8 || (m & (m - 1)) != 0) fail("grid.M", "must be a power of two >= 8");
          c.grid_m = static_cast<std::size_t>(m);
        } else {
          fail("grid." + gk, "unknown field");
        }
      }
    } else if (key == "physics") {
      if (!value.is_object()) fail("physics", "expected an object");
      for (const auto& [pk, pv] : value.items()) {
        if (pk == "epsilon") c.epsilon = require_number(pv, "physics.epsilon");
        else if (pk == "alpha") c.alpha = require_number(pv, "physics.alpha");
        else if (pk == "T") c.horizon = require_number(pv, "physics.T");
        else if (pk == "dt") {
          if (pv.is_string()) {
            if (pv.get<std::string>() != "auto") fail("physics.dt", "must be a number or \"auto\"");
          } else {
            c.dt = require_number(pv, "physics.dt");
          }
        } else if (pk == "eps_list") {
          if (!pv.is_array()) fail("physics.eps_list", "expected an array of numbers");
          c.eps_list.clear();
          for (std::size_t i = 0; i < pv.size(); ++i)
            c.eps_list.push_back(require_number(pv[i], "physics.eps_list[" + std::to_string(i) + "]"));
        } else {
          fail("physics." + pk, "unknown field");
        }
      }
    } else if (key == "damping") {
      if (value.is_string()) {
        if (value.get<std::string>() != "off") fail("damping", "must be an object or \"off\"");
        c.damping_on = false;
      } else if (value.is_object()) {
        for (const auto& [dk, dv] : value.items()) {
          if (dk == "center") c.damping_center = require_number(dv, "damping.center");
          else if (dk == "width") c.damping_width = require_number(dv, "damping.width");
          else if (dk == "law") {
            const std::string law = require_string(dv, "damping.law");
            if (law == "gdg") c.damping_law = DampingLaw::kGDG;
            else if (law == "lo") c.damping_law = DampingLaw::kGG;
            else fail("damping.law", "must be gdg|lo");
          } else {
            fail("damping." + dk, "unknown field");
          }
        }
      } else {
        fail("damping", "must be an object or \"off\"");
      }
    } else if (key == "initial") {
      c.initial = parse_state(value, "initial");
    } else if (key == "target") {
      c.target = parse_state(value, "target");
    } else if (key == "control") {
      if (!value.is_object()) fail("control", "expected an object");
      for (const auto& [ck, cv] : value.items()) {
        if (ck == "s") c.control_s = require_number(cv, "control.s");
        else if (ck == "cg_tol") c.cg_tol = require_number(cv, "control.cg_tol");
        else if (ck == "max_iter") c.max_iter = require_int(cv, "control.max_iter");
        else if (ck == "picard_tol") c.picard_tol = require_number(cv, "control.picard_tol");
        else if (ck == "max_picard") c.max_picard = require_int(cv, "control.max_picard");
        else if (ck == "delta") c.delta = require_number(cv, "control.delta");
        else if (ck == "allow_s_outside_range") {
          if (!cv.is_boolean()) fail("control.allow_s_outside_range", "expected a boolean");
          c.allow_s_outside_range = cv.get<bool>();
        } else {
          fail("control." + ck, "unknown field");
        }
      }
    } else if (key == "output") {
      if (!value.is_object()) fail("output", "expected an object");
      for (const auto& [ok, ov] : value.items()) {
        if (ok == "directory") c.out_directory = require_string(ov, "output.directory");
        else if (ok == "formats") {
          if (!ov.is_array()) fail("output.formats", "expected an array");
          c.formats.clear();
          for (const auto& f : ov) {
            const std::string name = require_string(f, "output.formats[]");
            if (name != "csv" && name != "json") fail("output.formats", "entries must be csv|json");
            c.formats.push_back(name);
          }
        } else if (ok == "stride") {
          c.stride = require_int(ov, "output.stride");
          if (c.stride < 1) fail("output.stride", "must be >= 1");
        } else {
          fail("output." + ok, "unknown field");
        }
      }
    } else if (key == "verify") {
      if (!value.is_boolean()) fail("verify", "expected a boolean");
      c.verify = value.get<bool>();
    } else {
      fail(key, "unknown field");
    }
  }

  // Range checks shared by every scenario.
  if (c.epsilon < 0.0 || c.epsilon > 1.0) fail("physics.epsilon", "must lie in [0, 1]");
  if (c.horizon <= 0.0) fail("physics.T", "must be positive");
  if (c.dt && *c.dt <= 0.0) fail("physics.dt", "must be positive");
  if (c.damping_on) {
    if (c.damping_width <= 0.0 || c.damping_width >= 2.0 * kPi)
      fail("damping.width", "must lie in (0, 2pi)");
    if (c.damping_center < 0.0 || c.damping_center >= 2.0 * kPi)
      fail("damping.center", "must lie in [0, 2pi)");
  }
  if (c.cg_tol <= 0.0) fail("control.cg_tol", "must be positive");
  if (c.max_iter < 1) fail("control.max_iter", "must be >= 1");
  if (c.picard_tol <= 0.0) fail("control.picard_tol", "must be positive");
  if (c.max_picard < 1) fail("control.max_picard", "must be >= 1");
  if (c.delta <= 0.0) fail("control.delta", "must be positive");
  return c;
}

std::string ScenarioConfig::to_json_text() const {
  ordered_json j;
  j["scenario"] = scenario_name(scenario);
  j["grid"] = {{"M", grid_m}};
  ordered_json physics;
  physics["epsilon"] = epsilon;
  physics["alpha"] = alpha;
  physics["T"] = horizon;
  if (dt) physics["dt"] = *dt; else physics["dt"] = "auto";
  if (!eps_list.empty()) physics["eps_list"] = eps_list;
  j["physics"] = physics;
  if (damping_on) {
    j["damping"] = {{"center", damping_center},
                    {"width", damping_width},
                    {"law", damping_law == DampingLaw::kGDG ? "gdg" : "lo"}};
  } else {
    j["damping"] = "off";
  }
  j["initial"] = state_to_json(initial);
  j["target"] = state_to_json(target);
  j["control"] = {{"s", control_s},
                  {"cg_tol", cg_tol},
                  {"max_iter", max_iter},
                  {"picard_tol", picard_tol},
                  {"max_picard", max_picard},
                  {"delta", delta},
                  {"allow_s_outside_range", allow_s_outside_range}};
  j["output"] = {{"directory", out_directory}, {"formats", formats}, {"stride", stride}};
  j["verify"] = verify;
  return j.dump(2) + "\n";
}

SpectralField random_initial(std::uint64_t seed, double target_norm, double sobolev_s,
                             int truncation) {
  if (target_norm <= 0.0) throw validation_error("target_norm must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField f(truncation);
  for (int k = 1; k <= truncation; ++k) {
    const double sigma = std::pow(1.0 + static_cast<double>(k) * k, -0.5 * (sobolev_s + 1.0));
    const double re = sigma * gauss(rng);
    const double im = sigma * gauss(rng);
    f.set_mode_pair(k, Complex(re, im));
  }
  const double norm = f.sobolev_norm(sobolev_s);
  if (norm == 0.0) throw validation_error("degenerate random draw");
  f *= target_norm / norm;
  return f;
}

// --- file writers -------------------------------------------------------------

void write_trajectory_csv(const Trajectory& traj, const std::string& path, int stride) {
  if (stride < 1) throw validation_error("stride must be >= 1");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot open " + path + " for writing");
  out << "t,l2_norm,hs_norm,I1,I2,eps_dissipation_cum,damping_dissipation_cum,"
         "smoothing_budget_cum,energy_residual\n";
  const std::size_t n = traj.ledger().size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i % static_cast<std::size_t>(stride) != 0 && i != n - 1) continue;
    const LedgerRow& r = traj.ledger()[i];
    out << fmt_double(r.t) << ',' << fmt_double(r.l2_norm) << ',' << fmt_double(r.hs_norm)
        << ',' << fmt_double(r.i1) << ',' << fmt_double(r.i2) << ','
        << fmt_double(r.eps_dissipation_cum) << ',' << fmt_double(r.damping_dissipation_cum)
        << ',' << fmt_double(r.smoothing_budget_cum) << ',' << fmt_double(r.energy_residual)
        << '\n';
  }
}

namespace {

ordered_json field_to_json(const SpectralField& f) {
  ordered_json coeffs = ordered_json::array();
  for (int k = -f.truncation(); k <= f.truncation(); ++k)
    coeffs.push_back({f.coeff(k).real(), f.coeff(k).imag()});
  return ordered_json{{"truncation", f.truncation()}, {"coefficients", coeffs}};
}

SpectralField field_from_json(const ordered_json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("truncation") || !j.contains("coefficients"))
    fail(path, "expected {truncation, coefficients}");
  const int k_max = require_int(j.at("truncation"), path + ".truncation");
  const auto& coeffs = j.at("coefficients");
  if (!coeffs.is_array() || coeffs.size() != static_cast<std::size_t>(2 * k_max + 1))
    fail(path + ".coefficients", "expected 2*truncation+1 [re, im] pairs");
  SpectralField f(k_max);
  for (int k = -k_max; k <= k_max; ++k) {
    const auto& pair = coeffs[static_cast<std::size_t>(k + k_max)];
    if (!pair.is_array() || pair.size() != 2)
      fail(path + ".coefficients", "entries must be [re, im] pairs");
    f.raw()[static_cast<std::size_t>(k + k_max)] =
        Complex(pair[0].get<double>(), pair[1].get<double>());
  }
  return f;
}

void write_json_file(const ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open " + path);
  try {
    return ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw validation_error(path + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace

void write_field_json(const SpectralField& f, const std::string& path) {
  write_json_file(field_to_json(f), path);
}

SpectralField read_field_json(const std::string& path) {
  return field_from_json(read_json_file(path), path);
}

void write_control_solution_json(const ControlSolution& sol, const std::string& path) {
  ordered_json j;
  j["truncation"] = sol.vT_seed.truncation();
  ordered_json vt = ordered_json::array();
  for (int k = -sol.vT_seed.truncation(); k <= sol.vT_seed.truncation(); ++k)
    vt.push_back({sol.vT_seed.coeff(k).real(), sol.vT_seed.coeff(k).imag()});
  j["vT_seed"] = vt;
  j["dt"] = sol.control.dt();
  ordered_json times = ordered_json::array();
  ordered_json k_values = ordered_json::array();
  for (std::size_t node = 0; node < sol.control.half_nodes(); ++node) {
    times.push_back(0.5 * sol.control.dt() * static_cast<double>(node));
    const SpectralField& f = sol.control.at_half_node(node);
    ordered_json coeffs = ordered_json::array();
    for (int k = -f.truncation(); k <= f.truncation(); ++k)
      coeffs.push_back({f.coeff(k).real(), f.coeff(k).imag()});
    k_values.push_back(coeffs);
  }
  j["k_times"] = times;
  j["k"] = k_values;
  j["cg_iterations"] = sol.cg_iterations;
  j["cg_residual"] = sol.cg_residual;
  j["picard_iterations"] = sol.picard_iterations;
  j["terminal_error"] = sol.terminal_error;
  write_json_file(j, path);
}

ForcingRecord read_control_record_json(const std::string& path) {
  const ordered_json j = read_json_file(path);
  if (!j.contains("truncation") || !j.contains("k") || !j.contains("dt"))
    fail(path, "expected {truncation, dt, k}");
  const int k_max = require_int(j.at("truncation"), path + ".truncation");
  const double dt = require_number(j.at("dt"), path + ".dt");
  const auto& values = j.at("k");
  if (!values.is_array() || values.empty()) fail(path + ".k", "expected an array");
  std::vector<SpectralField> fields;
  fields.reserve(values.size());
  for (const auto& coeffs : values) {
    SpectralField f(k_max);
    if (!coeffs.is_array() || coeffs.size() != static_cast<std::size_t>(2 * k_max + 1))
      fail(path + ".k", "entries must hold 2*truncation+1 [re, im] pairs");
    for (int k = -k_max; k <= k_max; ++k) {
      const auto& pair = coeffs[static_cast<std::size_t>(k + k_max)];
      f.raw()[static_cast<std::size_t>(k + k_max)] =
          Complex(pair[0].get<double>(), pair[1].get<double>());
    }
    fields.push_back(std::move(f));
  }
  return ForcingRecord(dt, std::move(fields));
}

// --- scenario dispatch ---------------------------------------------------------

namespace {

SpectralField build_state(const InitialConfig& c, int k_max, const std::string& path) {
  switch (c.kind) {
    case InitialConfig::Kind::kZero:
      return SpectralField(k_max);
    case InitialConfig::Kind::kRandom:
      return random_initial(*c.seed, c.target_norm, c.sobolev_s, k_max);
    case InitialConfig::Kind::kModes: {
      SpectralField f(k_max);
      for (const ModeListEntry& m : c.mode_list) {
        if (m.k == 0) fail(path + ".mode_list", "k = 0 would break the zero mean");
        if (std::abs(m.k) > k_max) fail(path + ".mode_list", "mode outside the retained band");
        f += SpectralField::harmonic(k_max, m.k, m.amplitude, m.phase);
      }
      return f;
    }
    case InitialConfig::Kind::kFile: {
      SpectralField f = read_field_json(c.file);
      if (f.truncation() != k_max)
        fail(path + ".file", "stored truncation does not match the configured grid");
      if (!f.is_zero_mean()) fail(path + ".file", "stored field must have zero mean");
      return f;
    }
  }
  fail(path, "unreachable state kind");
}

struct Workspace {
  std::shared_ptr<const DampingProfile> profile;
  EvolutionParams params;
  int truncation = 0;
};

Workspace make_workspace(const ScenarioConfig& c, const SpectralField& u0) {
  Workspace w;
  w.truncation = truncation_for_grid(c.grid_m);
  w.params.epsilon = c.epsilon;
  w.params.alpha = c.alpha;
  w.params.horizon = c.horizon;
  w.params.damping_on = c.damping_on;
  w.params.law = c.damping_law;
  if (c.damping_on) {
    w.profile = std::make_shared<DampingProfile>(
        DampingProfile::bump(c.damping_center, c.damping_width, c.grid_m));
    w.params.profile = w.profile;
  }
  if (c.dt) {
    w.params.dt = *c.dt;
    const double bound = w.params.cfl_dt(u0);
    std::cerr << "note: explicit dt " << fmt_double(*c.dt) << " overrides the step rule"
              << (*c.dt > bound ? " and exceeds the advective bound " + fmt_double(bound)
                                : std::string())
              << "\n";
  } else {
    w.params.dt = w.params.cfl_dt(u0);
  }
  return w;
}

ordered_json decay_to_json(const DecayFit& fit) {
  return ordered_json{{"prefactor", fit.prefactor},
                      {"rate", fit.rate},
                      {"window", {fit.window_start, fit.window_end}},
                      {"residual", fit.residual}};
}

// Commutator ratio experiment: bounded for admissible mode sets, growing for
// the odd-progression counterexample with complex symbol e^{ix}.
ordered_json commutator_report(std::uint64_t seed) {
  struct Case {
    std::string name;
    ProjectorSpec spec;
    int p;
    int q;
  };
  const std::vector<Case> cases = {
      {"positive-modes", ProjectorSpec::positive_modes(), 0, 0},
      {"positive-modes-p1q1", ProjectorSpec::positive_modes(), 1, 1},
      {"finite-set", ProjectorSpec::finite_set({-3, -2, -1, 0, 1, 2, 3, 4, 5}), 2, 1},
      {"complement-finite-set",
       ProjectorSpec::finite_set({-4, -1, 0, 2, 7}, /*complement=*/true), 1, 2},
  };
  SpectralField a_field(8);
  a_field.set_mode_pair(0, 1.0 / (2.0 * kPi));
  a_field.set_mode_pair(1, 0.25);
  a_field.set_mode_pair(2, 0.125);
  a_field.set_mode_pair(3, 0.05);
  const ModeSeries a(a_field);

  const std::vector<int> k_values = {32, 64, 128, 256};
  const int samples = 200;

  ordered_json admissible = ordered_json::array();
  for (const Case& cs : cases) {
    ordered_json ratios = ordered_json::array();
    std::vector<double> maxima;
    for (int k_max : k_values) {
      double worst = 0.0;
      for (int i = 0; i < samples; ++i) {
        const SpectralField v = random_initial(
            seed + static_cast<std::uint64_t>(1000 * k_max + i), 1.0, -1.0, k_max);
        const ModeSeries out = commutator_projector(a, cs.spec, cs.p, cs.q, ModeSeries(v));
        worst = std::max(worst, out.l2_norm() / v.l2_norm());
      }
      maxima.push_back(worst);
      ratios.push_back({{"K", k_max}, {"max_ratio", worst}});
    }
    double growth = 0.0;
    for (std::size_t i = 1; i < maxima.size(); ++i)
      growth = std::max(growth, maxima[i] / maxima[i - 1]);
    admissible.push_back({{"name", cs.name},
                          {"p", cs.p},
                          {"q", cs.q},
                          {"ratios", ratios},
                          {"max_growth_factor", growth}});
  }

  // N = 1 + 2Z with a = e^{ix}: ||[a,P] d_x e^{2imx}|| = 2m ||e^{2imx}||.
  const ProjectorSpec odd = ProjectorSpec::progression(1, 2);
  const ModeSeries a_complex = ModeSeries::exponential(1);
  ordered_json probes = ordered_json::array();
  for (int m : {4, 8, 16, 32}) {
    const ModeSeries v = ModeSeries::exponential(2 * m);
    const ModeSeries out = commutator_projector(a_complex, odd, 0, 1, v);
    const double ratio = out.l2_norm() / v.l2_norm();
    probes.push_back({{"mode", 2 * m},
                      {"ratio", ratio},
                      {"ratio_over_2m", ratio / (2.0 * m)}});
  }
  return ordered_json{{"admissible", admissible},
                      {"counterexample",
                       {{"set", "1+2Z"}, {"symbol", "e^{ix}"}, {"p", 0}, {"q", 1},
                        {"probes", probes}}}};
}

}  // namespace

RunRecord run_scenario(const ScenarioConfig& config) {
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();

  fs::create_directories(config.out_directory);
  const auto out_path = [&](const std::string& name) {
    return (fs::path(config.out_directory) / name).string();
  };

  RunRecord record;
  record.scenario = scenario_name(config.scenario);
  ordered_json reports;

  const int k_max = truncation_for_grid(config.grid_m);
  const bool want_csv =
      std::find(config.formats.begin(), config.formats.end(), "csv") != config.formats.end();

  switch (config.scenario) {
    case Scenario::kSimulate:
    case Scenario::kStabilize: {
      const SpectralField u0 = build_state(config.initial, k_max, "initial");
      Workspace w = make_workspace(config, u0);
      const Trajectory traj =
          config.scenario == Scenario::kStabilize
              ? closed_loop_feedback(u0, config.damping_law, w.params)
              : evolve(u0, w.params);
      if (want_csv) {
        write_trajectory_csv(traj, out_path("trajectory.csv"), config.stride);
        record.outputs["trajectory_csv"] = out_path("trajectory.csv");
      }
      write_field_json(traj.terminal(), out_path("final_state.json"));
      record.outputs["final_state_json"] = out_path("final_state.json");
      reports["terminal_l2"] = traj.ledger().back().l2_norm;
      reports["energy_residual"] = energy_residual(traj);
      reports["cfl_warning"] = traj.cfl_warning();
      if (config.scenario == Scenario::kStabilize) {
        reports["l2_nonincreasing"] = traj.l2_nonincreasing();
        const double w0 = 0.25 * config.horizon;
        reports["decay_fit"] = decay_to_json(fit_decay(traj, w0, config.horizon));
      }
      break;
    }
    case Scenario::kControlLinear:
    case Scenario::kControlNonlinear: {
      const bool nonlinear = config.scenario == Scenario::kControlNonlinear;
      const SpectralField u0 = build_state(config.initial, k_max, "initial");
      const SpectralField u1 = build_state(config.target, k_max, "target");
      Workspace w = make_workspace(config, u0.l2_norm() > 0.0 ? u0 : u1);
      if (!config.damping_on)
        throw validation_error("damping: control scenarios require the damping profile");
      ControlProblem prob{u0,
                          u1,
                          config.horizon,
                          config.control_s,
                          w.params,
                          config.cg_tol,
                          config.max_iter,
                          config.picard_tol,
                          config.max_picard,
                          config.delta,
                          config.allow_s_outside_range};
      prob.params.alpha = nonlinear ? config.alpha : 0.0;
      const ControlSolution sol =
          nonlinear ? solve_nonlinear_control(prob) : solve_linear_control(prob);
      write_control_solution_json(sol, out_path("solution.json"));
      record.outputs["solution_json"] = out_path("solution.json");
      if (want_csv) {
        write_trajectory_csv(sol.verified, out_path("trajectory.csv"), config.stride);
        record.outputs["trajectory_csv"] = out_path("trajectory.csv");
      }
      reports["terminal_error"] = sol.terminal_error;
      reports["cg_iterations"] = sol.cg_iterations;
      reports["picard_iterations"] = sol.picard_iterations;
      if (config.verify) {
        // Out-of-band re-integration from the serialized control record.
        const ForcingRecord k = read_control_record_json(out_path("solution.json"));
        ControlOperator op(config.horizon, config.control_s, w.params, k_max);
        EvolutionParams vp = op.base_params();
        vp.alpha = nonlinear ? config.alpha : 0.0;
        const Trajectory re = evolve(u0, vp, op.forcing_from_control(k));
        SpectralField miss = re.terminal();
        miss -= u1;
        reports["verified_terminal_error"] =
            miss.sobolev_norm(config.control_s) /
            std::max(u1.sobolev_norm(config.control_s), 1e-14);
      }
      break;
    }
    case Scenario::kObservability: {
      const SpectralField u0 = build_state(config.initial, k_max, "initial");
      Workspace w = make_workspace(config, u0);
      const ObservabilityReport rep = observability_ratio(u0, w.params);
      ordered_json j{{"numerator", rep.numerator},
                     {"denominator", rep.denominator},
                     {"ratio", rep.ratio},
                     {"epsilon", rep.epsilon},
                     {"T", rep.horizon},
                     {"K", rep.truncation},
                     {"degenerate", rep.degenerate}};
      write_json_file(j, out_path("observability.json"));
      record.outputs["observability_json"] = out_path("observability.json");
      reports["ratio"] = rep.ratio;
      break;
    }
    case Scenario::kViscositySweep: {
      const SpectralField u0 = build_state(config.initial, k_max, "initial");
      Workspace w = make_workspace(config, u0);
      std::vector<double> eps = config.eps_list;
      if (eps.empty()) eps = {1e-1, 1e-2, 1e-3, 1e-4};
      const ViscositySweepReport rep = viscosity_sweep(u0, eps, w.params);
      ordered_json entries = ordered_json::array();
      for (const ViscositySweepEntry& e : rep.entries)
        entries.push_back({{"epsilon", e.epsilon},
                           {"smoothing_budget", e.smoothing_budget},
                           {"terminal_l2", e.terminal_l2},
                           {"energy_residual", e.energy_residual}});
      ordered_json j{{"entries", entries},
                     {"successive_distances", rep.successive_distances}};
      write_json_file(j, out_path("sweep.json"));
      record.outputs["sweep_json"] = out_path("sweep.json");
      break;
    }
    case Scenario::kCommutatorTest: {
      const std::uint64_t seed = config.initial.seed.value_or(1);
      const ordered_json j = commutator_report(seed);
      write_json_file(j, out_path("commutator.json"));
      record.outputs["commutator_json"] = out_path("commutator.json");
      break;
    }
  }

  const auto t_end = std::chrono::steady_clock::now();
  record.wall_clock_seconds =
      std::chrono::duration<double>(t_end - t_start).count();

  ordered_json rr;
  rr["artifact_version"] = BO_VERSION_STRING;
  rr["scenario"] = record.scenario;
  rr["config"] = ordered_json::parse(config.to_json_text());
  rr["wall_clock_seconds"] = record.wall_clock_seconds;
  ordered_json outs;
  for (const auto& [name, path] : record.outputs) outs[name] = path;
  rr["outputs"] = outs;
  rr["reports"] = reports;
  record.record_path = out_path("run_record.json");
  write_json_file(rr, record.record_path);
  return record;
}

}  // namespace bo
