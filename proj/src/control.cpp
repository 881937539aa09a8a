#include "bo/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bo/errors.hpp"

namespace bo {

namespace {

bool admissible_s(double s) { return s == 0.0 || (s > 0.5 && s <= 2.0); }

std::vector<SpectralField> node_states(const Trajectory& traj) {
  std::vector<SpectralField> out;
  out.reserve(traj.nodes());
  for (std::size_t i = 0; i < traj.nodes(); ++i) out.push_back(traj.state(i));
  return out;
}

double sup_sobolev_distance(const std::vector<SpectralField>& a,
                            const std::vector<SpectralField>& b, double s) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    SpectralField d = a[i];
    d -= b[i];
    worst = std::max(worst, d.sobolev_norm(s));
  }
  return worst;
}

}  // namespace

ControlOperator::ControlOperator(double horizon, double s, EvolutionParams base,
                                 int truncation)
    : horizon_(horizon), s_(s), base_(std::move(base)), truncation_(truncation) {
  if (horizon_ <= 0.0) throw validation_error("control horizon must be positive");
  base_.alpha = 0.0;
  base_.damping_on = true;
  base_.law = DampingLaw::kGDG;
  base_.horizon = horizon_;
  base_.state_stride = 1;
  base_.validate();
  if (grid_for_truncation(truncation_) != base_.profile->grid_size())
    throw validation_error("field truncation does not match the damping grid");
  steps_ = horizon_ < base_.dt
               ? 1
               : static_cast<std::size_t>(std::llround(horizon_ / base_.dt));
  steps_ = std::max<std::size_t>(steps_, 1);
  dt_ = horizon_ / static_cast<double>(steps_);
  base_.dt = dt_;
}

Trajectory ControlOperator::adjoint_flow(const SpectralField& vT) const {
  EvolutionParams p = base_;
  p.dt = 0.5 * dt_;
  return evolve_adjoint(vT, p);
}

ForcingRecord ControlOperator::control_from_adjoint(const Trajectory& adjoint) const {
  if (adjoint.nodes() != 2 * steps_ + 1)
    throw validation_error("adjoint trajectory is not on the half-step grid");
  std::vector<SpectralField> k;
  k.reserve(adjoint.nodes());
  for (std::size_t j = 0; j < adjoint.nodes(); ++j) {
    SpectralField gv = apply_G(adjoint.state(j), *base_.profile);
    k.push_back(bessel_potential(fractional_derivative(gv, 0.5), -2.0 * s_));
  }
  return ForcingRecord(dt_, std::move(k));
}

ForcingRecord ControlOperator::forcing_from_control(const ForcingRecord& k) const {
  std::vector<SpectralField> g;
  g.reserve(k.half_nodes());
  for (std::size_t j = 0; j < k.half_nodes(); ++j)
    g.push_back(apply_G(fractional_derivative(k.at_half_node(j), 0.5), *base_.profile));
  return ForcingRecord(dt_, std::move(g));
}

Trajectory ControlOperator::forward(const SpectralField& u0,
                                    const std::optional<ForcingRecord>& g) const {
  return evolve(u0, base_, g);
}

SpectralField ControlOperator::apply(const SpectralField& vT) const {
  const Trajectory adjoint = adjoint_flow(vT);
  const ForcingRecord k = control_from_adjoint(adjoint);
  const ForcingRecord g = forcing_from_control(k);
  const Trajectory u = forward(SpectralField(vT.truncation()), g);
  return bessel_potential(u.terminal(), 2.0 * s_);
}

CgResult cg_solve(const ControlOperator& op, const SpectralField& rhs,
                  const std::optional<SpectralField>& warm_start, double tol,
                  int max_iter) {
  const double rhs_norm = std::sqrt(op.ip(rhs, rhs));
  CgResult out;
  out.x = SpectralField(rhs.truncation());
  if (rhs_norm == 0.0) return out;

  SpectralField x = warm_start ? *warm_start : SpectralField(rhs.truncation());
  SpectralField r = rhs;
  if (warm_start) r -= op.apply(x);
  SpectralField p = r;
  double rr = op.ip(r, r);

  for (int i = 1; i <= max_iter; ++i) {
    const SpectralField ap = op.apply(p);
    const double p_ap = op.ip(p, ap);
    if (p_ap <= 0.0)
      throw nonconvergence_error("Gramian lost positive definiteness in CG",
                                 out.history);
    const double step = rr / p_ap;
    x += step * p;
    r -= step * ap;
    const double rr_next = op.ip(r, r);
    const double rel = std::sqrt(rr_next) / rhs_norm;
    out.history.push_back(rel);
    if (rel <= tol) {
      out.x = std::move(x);
      out.iterations = i;
      out.residual = rel;
      return out;
    }
    // Stagnation: relative improvement below 1e-3 over a 50-iteration window.
    const std::size_t n = out.history.size();
    if (n > 50 && out.history[n - 1] > out.history[n - 51] * (1.0 - 1e-3))
      throw nonconvergence_error("CG stagnated (residual " + std::to_string(rel) + ")",
                                 out.history);
    const double beta = rr_next / rr;
    SpectralField next_p = r;
    next_p += beta * p;
    p = std::move(next_p);
    rr = rr_next;
  }
  throw nonconvergence_error("CG did not reach tolerance within max_iter", out.history);
}

SpectralField gramian_apply(const SpectralField& vT, double horizon, double s,
                            const EvolutionParams& params) {
  if (!vT.is_zero_mean()) throw validation_error("Gramian input must have zero mean");
  return ControlOperator(horizon, s, params, vT.truncation()).apply(vT);
}

namespace {

void validate_problem(const ControlProblem& prob, bool nonlinear) {
  if (!prob.u0.is_zero_mean() || !prob.u1.is_zero_mean())
    throw validation_error("control endpoints must have zero mean");
  if (!prob.allow_s_outside_range) {
    if (nonlinear && !(prob.s > 0.5 && prob.s <= 2.0))
      throw validation_error("nonlinear control requires s in (1/2, 2]");
    if (!nonlinear && !admissible_s(prob.s))
      throw validation_error("control regularity s must be 0 or lie in (1/2, 2]");
  }
  if (nonlinear) {
    const double n0 = prob.u0.sobolev_norm(prob.s);
    const double n1 = prob.u1.sobolev_norm(prob.s);
    if (n0 > prob.delta || n1 > prob.delta)
      throw validation_error("endpoint norms exceed the smallness threshold delta");
  }
}

}  // namespace

ControlSolution solve_linear_control(const ControlProblem& prob) {
  validate_problem(prob, /*nonlinear=*/false);
  if (prob.u0.truncation() != prob.u1.truncation())
    throw validation_error("control endpoints must share a truncation");
  ControlOperator op(prob.horizon, prob.s, prob.params, prob.u0.truncation());

  SpectralField drift = prob.u1;
  if (prob.u0.l2_norm() > 0.0) drift -= op.forward(prob.u0, std::nullopt).terminal();
  const SpectralField rhs = bessel_potential(drift, 2.0 * prob.s);

  const CgResult cg = cg_solve(op, rhs, std::nullopt, prob.cg_tol, prob.max_iter);
  const Trajectory adjoint = op.adjoint_flow(cg.x);
  ForcingRecord k = op.control_from_adjoint(adjoint);

  Trajectory verified = op.forward(prob.u0, op.forcing_from_control(k));
  SpectralField miss = verified.terminal();
  miss -= prob.u1;
  const double err = miss.sobolev_norm(prob.s) / std::max(prob.u1.sobolev_norm(prob.s), 1e-14);

  return ControlSolution{cg.x,           std::move(k), cg.iterations, cg.residual, 0,
                         err,            cg.history,   std::move(verified)};
}

ControlSolution solve_nonlinear_control(const ControlProblem& prob) {
  validate_problem(prob, /*nonlinear=*/true);
  if (prob.u0.truncation() != prob.u1.truncation())
    throw validation_error("control endpoints must share a truncation");
  ControlOperator op(prob.horizon, prob.s, prob.params, prob.u0.truncation());
  const int k_max = op.truncation();
  const double alpha = prob.params.alpha;
  const std::size_t n_nodes = op.steps() + 1;

  const SpectralField free_terminal =
      prob.u0.l2_norm() > 0.0 ? op.forward(prob.u0, std::nullopt).terminal()
                              : SpectralField(k_max);

  std::vector<SpectralField> v(n_nodes, SpectralField(k_max));  // v^0 = 0
  std::optional<SpectralField> warm;
  std::vector<double> increments;
  int total_cg = 0;
  double last_residual = 0.0;
  SpectralField vT_seed(k_max);
  std::optional<ForcingRecord> k_record;
  int iterations = 0;

  for (int m = 0; m < prob.max_picard; ++m) {
    // Quadratic transport term of the current iterate; from_step_nodes lifts
    // it onto the half-step grid the forced solve consumes.
    std::vector<SpectralField> vvx;
    vvx.reserve(n_nodes);
    for (const SpectralField& vi : v)
      vvx.push_back(alpha * multiply_dealiased(vi, derivative(vi)));
    const ForcingRecord r = ForcingRecord::from_step_nodes(op.step_size(), vvx);

    // omega(v): terminal state of the forced solve from zero data.
    SpectralField target = prob.u1;
    target -= free_terminal;
    target += op.forward(SpectralField(k_max), r).terminal();

    CgResult cg;
    try {
      cg = cg_solve(op, bessel_potential(target, 2.0 * prob.s), warm, prob.cg_tol,
                    prob.max_iter);
    } catch (const nonconvergence_error& e) {
      throw nonconvergence_error(
          std::string("fixed-point step lost the linear solve (") + e.what() +
              "); reduce ||u0||_s and ||u1||_s",
          increments);
    }
    total_cg += cg.iterations;
    last_residual = cg.residual;
    warm = cg.x;
    vT_seed = cg.x;

    ForcingRecord k = op.control_from_adjoint(op.adjoint_flow(cg.x));
    ForcingRecord g = op.forcing_from_control(k);
    for (std::size_t j = 0; j < g.half_nodes(); ++j)
      g.at_half_node(j) -= r.at_half_node(j);

    std::vector<SpectralField> v_next;
    try {
      v_next = node_states(op.forward(prob.u0, g));
    } catch (const divergence_error& e) {
      throw nonconvergence_error(
          std::string("fixed-point iterate blew up (") + e.what() +
              "); reduce ||u0||_s and ||u1||_s",
          increments);
    }
    iterations = m + 1;
    const double inc = sup_sobolev_distance(v_next, v, prob.s);
    increments.push_back(inc);
    v = std::move(v_next);
    k_record = std::move(k);

    if (inc < prob.picard_tol) break;
    const std::size_t ni = increments.size();
    if (ni >= 3 && increments[ni - 1] > increments[ni - 2] &&
        increments[ni - 2] > increments[ni - 3])
      throw nonconvergence_error(
          "fixed-point iteration diverged; reduce ||u0||_s and ||u1||_s",
          increments);
    if (m + 1 == prob.max_picard)
      throw nonconvergence_error("fixed-point iteration exhausted max_picard",
                                 increments);
  }

  // End-to-end verification: integrate the full nonlinear system with the
  // stored control and measure the miss at T.
  EvolutionParams nl = op.base_params();
  nl.alpha = alpha;
  Trajectory verified = evolve(prob.u0, nl, op.forcing_from_control(*k_record));
  SpectralField miss = verified.terminal();
  miss -= prob.u1;
  const double err = miss.sobolev_norm(prob.s) / std::max(prob.u1.sobolev_norm(prob.s), 1e-14);

  return ControlSolution{std::move(vT_seed), std::move(*k_record), total_cg,
                         last_residual,      iterations,          err,
                         {},                 std::move(verified)};
}

Trajectory closed_loop_feedback(const SpectralField& u0, DampingLaw law,
                                EvolutionParams params) {
  if (!u0.is_zero_mean()) throw validation_error("closed loop requires zero-mean data");
  params.damping_on = true;
  params.law = law;
  return evolve(u0, params);
}

}  // namespace bo
