#include "bocontrol.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <string>

#include "bo/diagnostics.hpp"
#include "bo/dynamics.hpp"
#include "bo/errors.hpp"
#include "bo/harness.hpp"
#include "bo/spectral.hpp"
#include "bo/version.hpp"

namespace {

thread_local std::string g_last_error;

bo_status to_status(std::exception_ptr eptr) {
  try {
    std::rethrow_exception(eptr);
  } catch (const bo::validation_error& e) {
    g_last_error = e.what();
    return BO_ERR_VALIDATION;
  } catch (const bo::divergence_error& e) {
    g_last_error = e.what();
    return BO_ERR_DIVERGENCE;
  } catch (const bo::nonconvergence_error& e) {
    g_last_error = e.what();
    return BO_ERR_NONCONVERGENCE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BO_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BO_ERR_INTERNAL;
  }
}

template <typename Fn>
bo_status guarded(Fn&& fn) {
  try {
    fn();
    return BO_OK;
  } catch (...) {
    return to_status(std::current_exception());
  }
}

}  // namespace

struct bo_field {
  bo::SpectralField rep;
};

struct bo_profile {
  std::shared_ptr<const bo::DampingProfile> rep;
};

struct bo_trajectory {
  bo::Trajectory rep;
};

extern "C" {

const char* bo_version(void) { return BO_VERSION_STRING; }

const char* bo_last_error(void) { return g_last_error.c_str(); }

bo_status bo_field_from_samples(const double* samples, size_t m, bo_field** out) {
  return guarded([&] {
    if (!samples || !out) throw bo::validation_error("null argument");
    *out = new bo_field{bo::SpectralField::from_samples({samples, m})};
  });
}

bo_status bo_field_harmonic(int truncation, int k, double amplitude, double phase,
                            bo_field** out) {
  return guarded([&] {
    if (!out) throw bo::validation_error("null argument");
    *out = new bo_field{bo::SpectralField::harmonic(truncation, k, amplitude, phase)};
  });
}

bo_status bo_field_random(uint64_t seed, double target_norm, double sobolev_s,
                          int truncation, bo_field** out) {
  return guarded([&] {
    if (!out) throw bo::validation_error("null argument");
    *out = new bo_field{bo::random_initial(seed, target_norm, sobolev_s, truncation)};
  });
}

bo_status bo_field_clone(const bo_field* f, bo_field** out) {
  return guarded([&] {
    if (!f || !out) throw bo::validation_error("null argument");
    *out = new bo_field{f->rep};
  });
}

void bo_field_free(bo_field* f) { delete f; }

int bo_field_truncation(const bo_field* f) { return f ? f->rep.truncation() : 0; }

size_t bo_field_grid_size(const bo_field* f) { return f ? f->rep.grid_size() : 0; }

bo_status bo_field_samples(const bo_field* f, double* samples, size_t m) {
  return guarded([&] {
    if (!f || !samples) throw bo::validation_error("null argument");
    const std::vector<double> values = f->rep.to_samples();
    if (values.size() != m)
      throw bo::validation_error("sample buffer must hold grid_size entries");
    std::memcpy(samples, values.data(), m * sizeof(double));
  });
}

bo_status bo_field_coeff(const bo_field* f, int k, double* re, double* im) {
  return guarded([&] {
    if (!f) throw bo::validation_error("null argument");
    if (std::abs(k) > f->rep.truncation())
      throw bo::validation_error("mode outside truncation");
    if (re) *re = f->rep.coeff(k).real();
    if (im) *im = f->rep.coeff(k).imag();
  });
}

bo_status bo_field_sobolev_norm(const bo_field* f, double s, double* out) {
  return guarded([&] {
    if (!f || !out) throw bo::validation_error("null argument");
    *out = f->rep.sobolev_norm(s);
  });
}

bo_status bo_field_hilbert(const bo_field* f, bo_field** out) {
  return guarded([&] {
    if (!f || !out) throw bo::validation_error("null argument");
    *out = new bo_field{bo::hilbert(f->rep)};
  });
}

bo_status bo_field_fractional_derivative(const bo_field* f, double s, bo_field** out) {
  return guarded([&] {
    if (!f || !out) throw bo::validation_error("null argument");
    *out = new bo_field{bo::fractional_derivative(f->rep, s)};
  });
}

bo_status bo_field_bessel_potential(const bo_field* f, double s, bo_field** out) {
  return guarded([&] {
    if (!f || !out) throw bo::validation_error("null argument");
    *out = new bo_field{bo::bessel_potential(f->rep, s)};
  });
}

bo_status bo_profile_bump(double center, double width, size_t grid_size,
                          bo_profile** out) {
  return guarded([&] {
    if (!out) throw bo::validation_error("null argument");
    *out = new bo_profile{std::make_shared<bo::DampingProfile>(
        bo::DampingProfile::bump(center, width, grid_size))};
  });
}

void bo_profile_free(bo_profile* p) { delete p; }

bo_status bo_apply_g(const bo_field* f, const bo_profile* p, bo_field** out) {
  return guarded([&] {
    if (!f || !p || !out) throw bo::validation_error("null argument");
    *out = new bo_field{bo::apply_G(f->rep, *p->rep)};
  });
}

bo_status bo_apply_gdg(const bo_field* f, const bo_profile* p, bo_field** out) {
  return guarded([&] {
    if (!f || !p || !out) throw bo::validation_error("null argument");
    *out = new bo_field{bo::apply_GDG(f->rep, *p->rep)};
  });
}

void bo_evolve_params_init(bo_evolve_params* params) {
  if (!params) return;
  params->epsilon = 0.0;
  params->alpha = 1.0;
  params->horizon = 1.0;
  params->dt = 0.0;
  params->damping_on = 0;
  params->law = 0;
  params->ledger_s = 0.5;
  params->state_stride = 1;
}

bo_status bo_evolve(const bo_field* u0, const bo_evolve_params* params,
                    const bo_profile* profile, bo_trajectory** out) {
  return guarded([&] {
    if (!u0 || !params || !out) throw bo::validation_error("null argument");
    bo::EvolutionParams p;
    p.epsilon = params->epsilon;
    p.alpha = params->alpha;
    p.horizon = params->horizon;
    p.damping_on = params->damping_on != 0;
    p.law = params->law == 0 ? bo::DampingLaw::kGDG : bo::DampingLaw::kGG;
    p.ledger_s = params->ledger_s;
    p.state_stride = params->state_stride;
    if (profile) p.profile = profile->rep;
    p.dt = params->dt > 0.0 ? params->dt : p.cfl_dt(u0->rep);
    *out = new bo_trajectory{bo::evolve(u0->rep, p)};
  });
}

size_t bo_trajectory_nodes(const bo_trajectory* t) { return t ? t->rep.nodes() : 0; }

bo_status bo_trajectory_time(const bo_trajectory* t, size_t node, double* out) {
  return guarded([&] {
    if (!t || !out) throw bo::validation_error("null argument");
    if (node >= t->rep.nodes()) throw bo::validation_error("node out of range");
    *out = t->rep.times()[node];
  });
}

bo_status bo_trajectory_ledger_row(const bo_trajectory* t, size_t node, double row[9]) {
  return guarded([&] {
    if (!t || !row) throw bo::validation_error("null argument");
    if (node >= t->rep.nodes()) throw bo::validation_error("node out of range");
    const bo::LedgerRow& r = t->rep.ledger()[node];
    row[0] = r.t;
    row[1] = r.l2_norm;
    row[2] = r.hs_norm;
    row[3] = r.i1;
    row[4] = r.i2;
    row[5] = r.eps_dissipation_cum;
    row[6] = r.damping_dissipation_cum;
    row[7] = r.smoothing_budget_cum;
    row[8] = r.energy_residual;
  });
}

bo_status bo_trajectory_state(const bo_trajectory* t, size_t node, bo_field** out) {
  return guarded([&] {
    if (!t || !out) throw bo::validation_error("null argument");
    *out = new bo_field{t->rep.state(node)};
  });
}

bo_status bo_trajectory_terminal(const bo_trajectory* t, bo_field** out) {
  return guarded([&] {
    if (!t || !out) throw bo::validation_error("null argument");
    *out = new bo_field{t->rep.terminal()};
  });
}

bo_status bo_trajectory_energy_residual(const bo_trajectory* t, double* out) {
  return guarded([&] {
    if (!t || !out) throw bo::validation_error("null argument");
    *out = bo::energy_residual(t->rep);
  });
}

bo_status bo_trajectory_write_csv(const bo_trajectory* t, const char* path, int stride) {
  return guarded([&] {
    if (!t || !path) throw bo::validation_error("null argument");
    bo::write_trajectory_csv(t->rep, path, stride);
  });
}

void bo_trajectory_free(bo_trajectory* t) { delete t; }

bo_status bo_fit_decay(const bo_trajectory* t, double window_start, double window_end,
                       double* prefactor, double* rate, double* rms) {
  return guarded([&] {
    if (!t) throw bo::validation_error("null argument");
    const bo::DecayFit fit = bo::fit_decay(t->rep, window_start, window_end);
    if (prefactor) *prefactor = fit.prefactor;
    if (rate) *rate = fit.rate;
    if (rms) *rms = fit.residual;
  });
}

bo_status bo_run_scenario(const char* config_json, const char* out_directory,
                          int64_t seed, int verify, char** record_json) {
  return guarded([&] {
    if (!config_json) throw bo::validation_error("null configuration");
    bo::ScenarioConfig config = bo::ScenarioConfig::from_json_text(config_json);
    if (out_directory) config.out_directory = out_directory;
    if (seed >= 0) {
      config.initial.seed = static_cast<uint64_t>(seed);
      if (config.initial.kind == bo::InitialConfig::Kind::kZero)
        config.initial.kind = bo::InitialConfig::Kind::kRandom;
    }
    if (verify) config.verify = true;
    const bo::RunRecord record = bo::run_scenario(config);
    if (record_json) {
      std::ifstream in(record.record_path, std::ios::binary);
      std::string text((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
      char* buf = new char[text.size() + 1];
      std::memcpy(buf, text.c_str(), text.size() + 1);
      *record_json = buf;
    }
  });
}

void bo_string_free(char* s) { delete[] s; }

}  // extern "C"
