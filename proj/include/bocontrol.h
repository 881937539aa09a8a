/*
 * C API for the periodic Benjamin-Ono stabilization/control library.
 *
 * All functions return bo_status; every non-BO_OK status leaves a
 * human-readable message retrievable through bo_last_error() (thread local).
 * Objects are opaque handles released with the matching *_free call.
 */
#ifndef BOCONTROL_H
#define BOCONTROL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bo_status {
  BO_OK = 0,
  BO_ERR_INTERNAL = 1,
  BO_ERR_VALIDATION = 2,     /* bad configuration or argument */
  BO_ERR_DIVERGENCE = 3,     /* solution blow-up */
  BO_ERR_NONCONVERGENCE = 4, /* CG/Picard failed to converge */
} bo_status;

const char* bo_version(void);
const char* bo_last_error(void);

/* ---- spectral fields ---------------------------------------------------- */

typedef struct bo_field bo_field;

/* Forward transform of m real grid samples (m a power of two >= 8). */
bo_status bo_field_from_samples(const double* samples, size_t m, bo_field** out);

/* amplitude*cos(k x + phase) embedded at the given truncation. */
bo_status bo_field_harmonic(int truncation, int k, double amplitude, double phase,
                            bo_field** out);

/* Seeded random zero-mean field with coefficient variance ~ (1+k^2)^(-s-1),
 * rescaled to the exact requested H^s norm. */
bo_status bo_field_random(uint64_t seed, double target_norm, double sobolev_s,
                          int truncation, bo_field** out);

bo_status bo_field_clone(const bo_field* f, bo_field** out);
void bo_field_free(bo_field* f);

int bo_field_truncation(const bo_field* f);
size_t bo_field_grid_size(const bo_field* f);

/* Inverse transform; samples must hold bo_field_grid_size(f) doubles. */
bo_status bo_field_samples(const bo_field* f, double* samples, size_t m);

/* Coefficient u_hat[k]. */
bo_status bo_field_coeff(const bo_field* f, int k, double* re, double* im);

bo_status bo_field_sobolev_norm(const bo_field* f, double s, double* out);

/* Fourier-multiplier calculus. */
bo_status bo_field_hilbert(const bo_field* f, bo_field** out);
bo_status bo_field_fractional_derivative(const bo_field* f, double s, bo_field** out);
bo_status bo_field_bessel_potential(const bo_field* f, double s, bo_field** out);

/* ---- localized damping weight ------------------------------------------- */

typedef struct bo_profile bo_profile;

/* Normalized C-infinity bump on the given grid. */
bo_status bo_profile_bump(double center, double width, size_t grid_size,
                          bo_profile** out);
void bo_profile_free(bo_profile* p);

/* G u = a (u - int a u dx). */
bo_status bo_apply_g(const bo_field* f, const bo_profile* p, bo_field** out);
/* G(D(G u)) damping feedback operator. */
bo_status bo_apply_gdg(const bo_field* f, const bo_profile* p, bo_field** out);

/* ---- evolution ----------------------------------------------------------- */

typedef struct bo_trajectory bo_trajectory;

typedef struct bo_evolve_params {
  double epsilon;    /* viscosity in [0, 1] */
  double alpha;      /* nonlinearity coefficient */
  double horizon;    /* T > 0 */
  double dt;         /* <= 0 selects the advective CFL rule */
  int damping_on;    /* nonzero enables the feedback */
  int law;           /* 0: -G D G u, 1: -G G u */
  double ledger_s;   /* Sobolev index of the ledger's hs_norm column */
  int state_stride;  /* snapshot stride (>= 1) */
} bo_evolve_params;

void bo_evolve_params_init(bo_evolve_params* params);

/* Integrates u_t + H u_xx + alpha u u_x = eps u_xx - damping(u); the profile
 * may be NULL when damping_on is zero. */
bo_status bo_evolve(const bo_field* u0, const bo_evolve_params* params,
                    const bo_profile* profile, bo_trajectory** out);

size_t bo_trajectory_nodes(const bo_trajectory* t);
bo_status bo_trajectory_time(const bo_trajectory* t, size_t node, double* out);

/* Ledger row: t, l2_norm, hs_norm, I1, I2, eps_dissipation_cum,
 * damping_dissipation_cum, smoothing_budget_cum, energy_residual. */
bo_status bo_trajectory_ledger_row(const bo_trajectory* t, size_t node,
                                   double row[9]);

bo_status bo_trajectory_state(const bo_trajectory* t, size_t node, bo_field** out);
bo_status bo_trajectory_terminal(const bo_trajectory* t, bo_field** out);
bo_status bo_trajectory_energy_residual(const bo_trajectory* t, double* out);
bo_status bo_trajectory_write_csv(const bo_trajectory* t, const char* path, int stride);
void bo_trajectory_free(bo_trajectory* t);

/* Least-squares exponential fit ||u(t)|| ~ C e^{-lambda t} ||u0|| on the
 * window; any of the result pointers may be NULL. */
bo_status bo_fit_decay(const bo_trajectory* t, double window_start, double window_end,
                       double* prefactor, double* rate, double* rms);

/* ---- scenario runner ------------------------------------------------------ */

/* Runs one scenario from a JSON configuration (see README for the layout).
 * out_directory (optional, may be NULL) overrides output.directory; seed >= 0
 * overrides initial.seed; verify != 0 re-integrates control solutions from the
 * serialized record.  On success *record_json (optional) receives the run
 * record; release with bo_string_free. */
bo_status bo_run_scenario(const char* config_json, const char* out_directory,
                          int64_t seed, int verify, char** record_json);

void bo_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BOCONTROL_H */
