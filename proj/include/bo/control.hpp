#ifndef BO_CONTROL_HPP
#define BO_CONTROL_HPP

#include <optional>
#include <vector>

#include "bo/dynamics.hpp"
#include "bo/spectral.hpp"

namespace bo {

/// Steering task u(0) = u0 -> u(T) = u1 for the damped linear / full system
/// with control entering as G D^(1/2) k.
struct ControlProblem {
  SpectralField u0;
  SpectralField u1;
  double horizon = 1.0;
  double s = 0.0;  // regularity of the control space, {0} or (1/2, 2]
  EvolutionParams params;  // grid, profile, dt; alpha fixed per variant
  double cg_tol = 1e-8;
  int max_iter = 500;
  double picard_tol = 1e-9;
  int max_picard = 50;
  double delta = 1e-2;  // smallness gate for the nonlinear variant
  bool allow_s_outside_range = false;
};

struct ControlSolution {
  SpectralField vT_seed;   // HUM minimizer
  ForcingRecord control;   // k on the half-step grid
  int cg_iterations = 0;
  double cg_residual = 0.0;
  int picard_iterations = 0;       // 0 for the linear variant
  double terminal_error = 0.0;     // from the independent verification solve
  std::vector<double> cg_history;
  Trajectory verified;             // the verification trajectory
};

/// Duality pipeline shared by the Gramian, the CG inversion and the Picard
/// loop: backward adjoint solve (at half step so the control needs no
/// interpolation), control reconstruction, forced forward solve.
class ControlOperator {
 public:
  ControlOperator(double horizon, double s, EvolutionParams base, int truncation);

  std::size_t steps() const { return steps_; }
  double step_size() const { return dt_; }
  int truncation() const { return truncation_; }
  double sobolev_index() const { return s_; }

  /// Adjoint flow from vT, forward-indexed, one node per half step.
  Trajectory adjoint_flow(const SpectralField& vT) const;

  /// k = (1 - d_x^2)^{-s} D^(1/2) (G v) at every adjoint node.
  ForcingRecord control_from_adjoint(const Trajectory& adjoint) const;

  /// g = G D^(1/2) k.
  ForcingRecord forcing_from_control(const ForcingRecord& k) const;

  Trajectory forward(const SpectralField& u0,
                     const std::optional<ForcingRecord>& g) const;

  /// Gramian: (1 - d_x^2)^s u(T) of the forced solve from zero data.
  SpectralField apply(const SpectralField& vT) const;

  /// H^{-s} inner product in which the Gramian is self-adjoint.
  double ip(const SpectralField& a, const SpectralField& b) const {
    return inner_product_sobolev(a, b, -s_);
  }

  const EvolutionParams& base_params() const { return base_; }

 private:
  double horizon_;
  double s_;
  EvolutionParams base_;
  int truncation_;
  std::size_t steps_;
  double dt_;
};

struct CgResult {
  SpectralField x;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

/// Conjugate gradient on the Gramian in the H^{-s} inner product.  Throws
/// nonconvergence_error on stagnation or iteration exhaustion.
CgResult cg_solve(const ControlOperator& op, const SpectralField& rhs,
                  const std::optional<SpectralField>& warm_start, double tol,
                  int max_iter);

/// One application of the (s-weighted) control Gramian.
SpectralField gramian_apply(const SpectralField& vT, double horizon, double s,
                            const EvolutionParams& params);

ControlSolution solve_linear_control(const ControlProblem& prob);
ControlSolution solve_nonlinear_control(const ControlProblem& prob);

/// Closed-loop run under the selected damping law (kGDG or the quadratic-mask
/// comparison kGG).
Trajectory closed_loop_feedback(const SpectralField& u0, DampingLaw law,
                                EvolutionParams params);

}  // namespace bo

#endif
