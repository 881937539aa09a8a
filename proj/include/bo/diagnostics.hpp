#ifndef BO_DIAGNOSTICS_HPP
#define BO_DIAGNOSTICS_HPP

#include <utility>
#include <vector>

#include "bo/dynamics.hpp"
#include "bo/spectral.hpp"

namespace bo {

/// ||u(t)|| ~ C e^{-lambda t} ||u0|| fitted by least squares on the log norm.
struct DecayFit {
  double prefactor = 0.0;     // C
  double rate = 0.0;          // lambda
  double window_start = 0.0;
  double window_end = 0.0;
  double residual = 0.0;      // RMS of the log-linear fit
};

/// Two sides of the observability inequality
///   ||u0||^2 <= C (eps int ||u_x||^2 + int ||D^(1/2)(Gu)||^2).
struct ObservabilityReport {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
  double epsilon = 0.0;
  double horizon = 0.0;
  int truncation = 0;
  bool degenerate = false;  // zero denominator (weight vanishes)
};

struct ViscositySweepEntry {
  double epsilon = 0.0;
  double smoothing_budget = 0.0;  // int_0^T ||D^(1/2) u||^2 dt
  double terminal_l2 = 0.0;
  double energy_residual = 0.0;
};

struct ViscositySweepReport {
  std::vector<ViscositySweepEntry> entries;
  /// sup-in-time L^2 distance between successive trajectories of the sweep.
  std::vector<double> successive_distances;
};

/// (I1, I2) = (int u dx, int u^2 dx).
std::pair<double, double> conserved_functionals(const SpectralField& u);

/// (sup_t ||u(t)||_s, (int_0^T ||u(t)||_{s+1/2}^2 dt)^(1/2)) over the stored
/// snapshots (trapezoidal in time).
std::pair<double, double> trajectory_norms(const Trajectory& traj, double s);

DecayFit fit_decay(const Trajectory& traj, double window_start, double window_end);

ObservabilityReport observability_ratio(const SpectralField& u0,
                                        const EvolutionParams& params);

/// Runs the evolution for each viscosity in the strictly decreasing list and
/// reports smoothing budgets plus sup-in-time distances between successive
/// trajectories.  Entries run concurrently.
ViscositySweepReport viscosity_sweep(const SpectralField& u0,
                                     const std::vector<double>& eps_list,
                                     const EvolutionParams& params);

}  // namespace bo

#endif
