#include "bo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bo/errors.hpp"

namespace bo {

namespace {

constexpr double kBlowupThreshold = 1e12;

double max_abs_coeff(const SpectralField& u) {
  double m = 0.0;
  for (const Complex& c : u.raw()) m = std::max(m, std::abs(c));
  return m;
}

double max_abs_sample(const SpectralField& u) {
  double m = 0.0;
  for (double v : u.to_samples()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

void EvolutionParams::validate() const {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw validation_error("epsilon must lie in [0, 1]");
  if (horizon <= 0.0) throw validation_error("horizon must be positive");
  if (dt <= 0.0) throw validation_error("dt must be positive");
  if (cfl_factor <= 0.0) throw validation_error("cfl_factor must be positive");
  if (state_stride < 1) throw validation_error("state_stride must be >= 1");
  if (damping_on && !profile) throw validation_error("damping requires a profile");
}

double EvolutionParams::cfl_dt(const SpectralField& u0) const {
  const double k = static_cast<double>(u0.truncation());
  return cfl_factor / (k * (1.0 + max_abs_sample(u0)));
}

ForcingRecord::ForcingRecord(double dt, std::vector<SpectralField> half_step_values)
    : dt_(dt), values_(std::move(half_step_values)) {
  if (dt_ <= 0.0) throw validation_error("forcing dt must be positive");
  if (values_.empty() || values_.size() % 2 == 0)
    throw validation_error("forcing record must hold 2*steps + 1 half-step values");
}

ForcingRecord ForcingRecord::zero(int truncation, double dt, std::size_t steps) {
  return ForcingRecord(dt, std::vector<SpectralField>(2 * steps + 1, SpectralField(truncation)));
}

ForcingRecord ForcingRecord::from_step_nodes(double dt, const std::vector<SpectralField>& nodes) {
  const std::size_t n = nodes.size();
  if (n < 2) throw validation_error("forcing needs at least two step nodes");
  std::vector<SpectralField> half(2 * n - 1, SpectralField(nodes[0].truncation()));
  for (std::size_t i = 0; i < n; ++i) half[2 * i] = nodes[i];
  auto blend = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d,
                   double wa, double wb, double wc, double wd) {
    SpectralField out = wa * nodes[a];
    out += wb * nodes[b];
    out += wc * nodes[c];
    out += wd * nodes[d];
    return out;
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (n < 4) {  // too short for a cubic stencil; linear midpoint
      half[2 * i + 1] = 0.5 * nodes[i];
      half[2 * i + 1] += 0.5 * nodes[i + 1];
    } else if (i == 0) {
      half[1] = blend(0, 1, 2, 3, 5.0 / 16, 15.0 / 16, -5.0 / 16, 1.0 / 16);
    } else if (i + 2 >= n) {
      half[2 * i + 1] = blend(n - 4, n - 3, n - 2, n - 1,
                              1.0 / 16, -5.0 / 16, 15.0 / 16, 5.0 / 16);
    } else {
      half[2 * i + 1] = blend(i - 1, i, i + 1, i + 2,
                              -1.0 / 16, 9.0 / 16, 9.0 / 16, -1.0 / 16);
    }
  }
  return ForcingRecord(dt, std::move(half));
}

Trajectory Trajectory::from_norm_history(std::vector<double> times,
                                         std::vector<double> l2_norms) {
  if (times.size() != l2_norms.size() || times.empty())
    throw validation_error("norm history needs matching nonempty times and norms");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw validation_error("norm history times must increase");
  Trajectory traj;
  traj.times_ = std::move(times);
  traj.dt_ = traj.times_.size() > 1 ? traj.times_[1] - traj.times_[0] : 0.0;
  traj.ledger_.resize(traj.times_.size());
  for (std::size_t i = 0; i < traj.times_.size(); ++i) {
    traj.ledger_[i].t = traj.times_[i];
    traj.ledger_[i].l2_norm = l2_norms[i];
    traj.ledger_[i].i2 = l2_norms[i] * l2_norms[i];
    if (i > 0 && l2_norms[i] > l2_norms[i - 1]) traj.l2_nonincreasing_ = false;
  }
  return traj;
}

bool Trajectory::has_state(std::size_t node) const {
  return std::binary_search(state_nodes_.begin(), state_nodes_.end(), node);
}

const SpectralField& Trajectory::state(std::size_t node) const {
  auto it = std::lower_bound(state_nodes_.begin(), state_nodes_.end(), node);
  if (it == state_nodes_.end() || *it != node)
    throw validation_error("no stored state at requested node");
  return states_[static_cast<std::size_t>(it - state_nodes_.begin())];
}

// ----------------------------------------------------------------------------

class Integrator {
 public:
  Integrator(const SpectralField& u0, const EvolutionParams& params,
             const std::optional<ForcingRecord>& forcing, int dispersion_sign)
      : params_(params), forcing_(forcing), sign_(dispersion_sign), u_(u0) {
    params_.validate();
    if (!u0.is_zero_mean()) throw validation_error("initial state must have zero mean");
    if (params_.damping_on && params_.profile->grid_size() != u0.grid_size())
      throw validation_error("grid mismatch between state and damping profile");

    steps_ = params_.horizon < params_.dt
                 ? 1
                 : static_cast<std::size_t>(std::llround(params_.horizon / params_.dt));
    steps_ = std::max<std::size_t>(steps_, 1);
    dt_ = params_.horizon / static_cast<double>(steps_);
    if (forcing_) {
      if (forcing_->half_nodes() != 2 * steps_ + 1)
        throw validation_error("forcing record is not aligned with the integration grid");
      if (std::abs(forcing_->dt() - dt_) > 1e-12 * std::max(1.0, dt_))
        throw validation_error("forcing record step does not match integration step");
    }

    const int k_max = u_.truncation();
    half_factor_.resize(static_cast<std::size_t>(2 * k_max + 1));
    for (int k = -k_max; k <= k_max; ++k) {
      const Complex symbol(-params_.epsilon * k * k,
                           -sign_ * static_cast<double>(k) * std::abs(k));
      half_factor_[static_cast<std::size_t>(k + k_max)] = std::exp(0.5 * dt_ * symbol);
    }
  }

  Trajectory run() {
    Trajectory traj;
    traj.dt_ = dt_;
    traj.cfl_warning_ = dt_ > params_.cfl_dt(u_) * (1.0 + 1e-12);
    const double e0 = 0.5 * u_.l2_norm() * u_.l2_norm();

    record_node(traj, 0, e0);
    for (std::size_t n = 0; n < steps_; ++n) {
      step(n);
      if (max_abs_coeff(u_) > kBlowupThreshold)
        throw divergence_error("solution blew up", static_cast<double>(n) * dt_);
      record_node(traj, n + 1, e0);
    }
    for (std::size_t i = 1; i < traj.ledger_.size(); ++i)
      if (traj.ledger_[i].l2_norm > traj.ledger_[i - 1].l2_norm) {
        traj.l2_nonincreasing_ = false;
        break;
      }
    return traj;
  }

 private:
  struct StageEval {
    SpectralField rate;     // N(u, g)
    double grad_sq = 0.0;   // ||u_x||^2
    double damp_sq = 0.0;   // ||D^(1/2)Gu||^2 (or ||Gu||^2 for the GG law)
    double smooth_sq = 0.0; // ||D^(1/2)u||^2
  };

  StageEval eval(const SpectralField& u, std::size_t half_node) {
    StageEval out{SpectralField(u.truncation())};
    const SpectralField ux = derivative(u);
    out.grad_sq = inner_product(ux, ux);
    {
      const SpectralField dhalf = fractional_derivative(u, 0.5);
      out.smooth_sq = inner_product(dhalf, dhalf);
    }
    if (params_.alpha != 0.0) {
      out.rate -= params_.alpha * multiply_dealiased(u, ux);
    }
    if (params_.damping_on) {
      const SpectralField gu = apply_G(u, *params_.profile);
      if (params_.law == DampingLaw::kGDG) {
        const SpectralField dgu = fractional_derivative(gu, 1.0);
        out.damp_sq = inner_product(dgu, gu);  // = ||D^(1/2)Gu||^2
        out.rate -= apply_G(dgu, *params_.profile);
      } else {
        out.damp_sq = inner_product(gu, gu);
        out.rate -= apply_G(gu, *params_.profile);
      }
    }
    if (forcing_) out.rate += forcing_->at_half_node(half_node);
    out.rate.zero_mean();
    return out;
  }

  SpectralField phase(const SpectralField& f, int half_applications) const {
    SpectralField out = f;
    const int k_max = f.truncation();
    for (int k = -k_max; k <= k_max; ++k) {
      Complex factor = half_factor_[static_cast<std::size_t>(k + k_max)];
      if (half_applications == 2) factor *= factor;
      out.raw()[static_cast<std::size_t>(k + k_max)] *= factor;
    }
    return out;
  }

  void step(std::size_t n) {
    const double h = dt_;
    const std::size_t j0 = 2 * n, jh = 2 * n + 1, j1 = 2 * n + 2;

    const StageEval s1 = eval(u_, j0);
    SpectralField u2 = u_;
    u2 += (0.5 * h) * s1.rate;
    u2 = phase(u2, 1);
    const StageEval s2 = eval(u2, jh);

    SpectralField u3 = phase(u_, 1);
    u3 += (0.5 * h) * s2.rate;
    const StageEval s3 = eval(u3, jh);

    SpectralField u4 = phase(u_, 2);
    u4 += h * phase(s3.rate, 1);
    const StageEval s4 = eval(u4, j1);

    SpectralField next = phase(u_, 2);
    next += (h / 6.0) * phase(s1.rate, 2);
    next += (h / 3.0) * phase(s2.rate, 1);
    next += (h / 3.0) * phase(s3.rate, 1);
    next += (h / 6.0) * s4.rate;
    next.zero_mean();
    u_ = std::move(next);

    auto quad = [&](double f1, double f2, double f3, double f4) {
      return h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    };
    grad_cum_ += quad(s1.grad_sq, s2.grad_sq, s3.grad_sq, s4.grad_sq);
    damp_cum_ += quad(s1.damp_sq, s2.damp_sq, s3.damp_sq, s4.damp_sq);
    smooth_cum_ += quad(s1.smooth_sq, s2.smooth_sq, s3.smooth_sq, s4.smooth_sq);
  }

  void record_node(Trajectory& traj, std::size_t node, double e0) {
    LedgerRow row;
    row.t = static_cast<double>(node) * dt_;
    row.l2_norm = u_.l2_norm();
    row.hs_norm = u_.sobolev_norm(params_.ledger_s);
    row.i1 = u_.mean();
    row.i2 = row.l2_norm * row.l2_norm;
    row.eps_dissipation_cum = params_.epsilon * grad_cum_;
    row.damping_dissipation_cum = damp_cum_;
    row.smoothing_budget_cum = smooth_cum_;
    const double lhs = 0.5 * row.i2 + row.eps_dissipation_cum + row.damping_dissipation_cum;
    row.energy_residual = e0 > 0.0 ? std::abs(lhs - e0) / e0 : 0.0;
    traj.times_.push_back(row.t);
    traj.ledger_.push_back(row);
    if (node % static_cast<std::size_t>(params_.state_stride) == 0 || node == steps_) {
      traj.states_.push_back(u_);
      traj.state_nodes_.push_back(node);
    }
  }

  EvolutionParams params_;
  const std::optional<ForcingRecord>& forcing_;
  int sign_;
  SpectralField u_;
  std::vector<Complex> half_factor_;  // exp(L dt/2) per mode
  std::size_t steps_ = 0;
  double dt_ = 0.0;
  double grad_cum_ = 0.0;
  double damp_cum_ = 0.0;
  double smooth_cum_ = 0.0;
};

Trajectory evolve(const SpectralField& u0, const EvolutionParams& params,
                  const std::optional<ForcingRecord>& forcing) {
  return Integrator(u0, params, forcing, +1).run();
}

SpectralField semigroup_S(const SpectralField& u0, double t, const EvolutionParams& params) {
  if (params.alpha != 0.0 || !params.damping_on || params.epsilon != 0.0)
    throw validation_error("semigroup requires alpha = 0, damping on, epsilon = 0");
  if (t < 0.0) throw validation_error("semigroup time must be nonnegative");
  if (t == 0.0) return u0;
  EvolutionParams p = params;
  p.horizon = t;
  return evolve(u0, p).terminal();
}

Trajectory evolve_adjoint(const SpectralField& vT, const EvolutionParams& params) {
  if (params.alpha != 0.0)
    throw validation_error("adjoint flow is defined for the linear system (alpha = 0)");
  Trajectory back = Integrator(vT, params, std::nullopt, -1).run();

  // Reindex tau = T - t forward in t.  Cumulative columns become integrals
  // over (t, T]; the residual column was accumulated against the backward
  // identity anchored at v(T) and carries over unchanged.
  Trajectory out = back;
  const std::size_t n = back.times_.size();
  const double horizon = back.times_.back();
  for (std::size_t i = 0; i < n; ++i) {
    out.ledger_[i] = back.ledger_[n - 1 - i];
    out.ledger_[i].t = horizon - back.times_[n - 1 - i];
    out.times_[i] = out.ledger_[i].t;
  }
  const std::size_t m = back.state_nodes_.size();
  for (std::size_t i = 0; i < m; ++i) {
    out.states_[i] = back.states_[m - 1 - i];
    out.state_nodes_[i] = n - 1 - back.state_nodes_[m - 1 - i];
  }
  out.time_reversed_ = true;
  return out;
}

double energy_residual(const Trajectory& traj) {
  if (traj.ledger().empty()) throw validation_error("empty trajectory");
  double worst = 0.0;
  for (const LedgerRow& row : traj.ledger())
    worst = std::max(worst, row.energy_residual);
  return worst;
}

}  // namespace bo
