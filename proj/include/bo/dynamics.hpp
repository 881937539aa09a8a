#ifndef BO_DYNAMICS_HPP
#define BO_DYNAMICS_HPP

#include <memory>
#include <optional>
#include <vector>

#include "bo/spectral.hpp"

namespace bo {

enum class DampingLaw {
  kGDG,  // -G(D(G u)), half-derivative weighted
  kGG,   // -G(G u), plain quadratic mask
};

/// Parameters of the viscous damped Benjamin-Ono family
///   u_t + H u_xx + alpha u u_x = epsilon u_xx - damping(u) + g.
struct EvolutionParams {
  double epsilon = 0.0;  // viscosity, in [0, 1]
  double alpha = 1.0;    // nonlinearity coefficient
  bool damping_on = false;
  DampingLaw law = DampingLaw::kGDG;
  double horizon = 1.0;  // T
  double dt = 1e-3;
  double cfl_factor = 0.5;
  double ledger_s = 0.5;   // Sobolev index of the ledger's hs_norm column
  int state_stride = 1;    // snapshot every k-th node (first/last always kept)
  std::shared_ptr<const DampingProfile> profile;

  void validate() const;

  /// Advective step bound cfl_factor / (K (1 + max|u0|)).
  double cfl_dt(const SpectralField& u0) const;
};

/// Per-node energy ledger.  Cumulative columns are time integrals accumulated
/// with the integrator's own stage quadrature; energy_residual is the relative
/// defect of  1/2||u||^2 + eps int ||u_x||^2 + int ||D^(1/2)Gu||^2 = 1/2||u0||^2.
struct LedgerRow {
  double t = 0.0;
  double l2_norm = 0.0;
  double hs_norm = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double eps_dissipation_cum = 0.0;
  double damping_dissipation_cum = 0.0;
  double smoothing_budget_cum = 0.0;
  double energy_residual = 0.0;
};

/// Control/forcing samples g aligned with the integration grid: one value per
/// half step (2*steps + 1 entries) so the RK4 stages at t, t+dt/2, t+dt all
/// read exact record values.
class ForcingRecord {
 public:
  ForcingRecord(double dt, std::vector<SpectralField> half_step_values);

  static ForcingRecord zero(int truncation, double dt, std::size_t steps);

  /// Builds the half-step record from values at the step nodes only
  /// (midpoints by 4th-order interpolation).
  static ForcingRecord from_step_nodes(double dt, const std::vector<SpectralField>& nodes);

  std::size_t steps() const { return (values_.size() - 1) / 2; }
  double dt() const { return dt_; }
  const SpectralField& at_half_node(std::size_t j) const { return values_[j]; }
  SpectralField& at_half_node(std::size_t j) { return values_[j]; }
  std::size_t half_nodes() const { return values_.size(); }

 private:
  double dt_;
  std::vector<SpectralField> values_;
};

/// Time-stamped evolution result: ledger at every node, states at the
/// configured stride.
class Trajectory {
 public:
  /// Ledger-only trajectory from an imported norm history (no states); feeds
  /// the post-processing helpers (decay fits, norm summaries).
  static Trajectory from_norm_history(std::vector<double> times,
                                      std::vector<double> l2_norms);

  const std::vector<double>& times() const { return times_; }
  const std::vector<LedgerRow>& ledger() const { return ledger_; }

  std::size_t nodes() const { return times_.size(); }
  double horizon() const { return times_.back(); }
  double dt() const { return dt_; }

  bool has_state(std::size_t node) const;
  const SpectralField& state(std::size_t node) const;
  const SpectralField& initial() const { return state(0); }
  const SpectralField& terminal() const { return state(times_.size() - 1); }

  bool cfl_warning() const { return cfl_warning_; }
  bool l2_nonincreasing() const { return l2_nonincreasing_; }
  bool time_reversed() const { return time_reversed_; }

 private:
  friend class Integrator;
  friend Trajectory evolve_adjoint(const SpectralField&, const EvolutionParams&);
  std::vector<double> times_;
  std::vector<LedgerRow> ledger_;
  std::vector<SpectralField> states_;
  std::vector<std::size_t> state_nodes_;  // node index of each stored state
  double dt_ = 0.0;
  bool cfl_warning_ = false;
  bool l2_nonincreasing_ = true;
  bool time_reversed_ = false;
};

/// Integrates the damped/viscous family with an integrating-factor RK4 that is
/// exact on the diagonal symbol -(i k|k| + eps k^2); the dealiased
/// nonlinearity, the damping operator and the forcing are explicit stages.
Trajectory evolve(const SpectralField& u0, const EvolutionParams& params,
                  const std::optional<ForcingRecord>& forcing = std::nullopt);

/// Damped linear semigroup S(t)u0 (alpha = 0, damping on, epsilon = 0).
SpectralField semigroup_S(const SpectralField& u0, double t, const EvolutionParams& params);

/// Backward adjoint flow  -v_t - H v_xx + G D G v = 0, v(T) = vT, integrated
/// via tau = T - t (flipped dispersion, same dissipation sign) and returned
/// forward-indexed.
Trajectory evolve_adjoint(const SpectralField& vT, const EvolutionParams& params);

/// Max over nodes of the ledger's relative energy-identity defect.
double energy_residual(const Trajectory& traj);

}  // namespace bo

#endif
