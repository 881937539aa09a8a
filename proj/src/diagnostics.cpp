#include "bo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "bo/errors.hpp"

namespace bo {

std::pair<double, double> conserved_functionals(const SpectralField& u) {
  return {u.mean(), u.l2_norm() * u.l2_norm()};
}

std::pair<double, double> trajectory_norms(const Trajectory& traj, double s) {
  if (traj.nodes() == 0) throw validation_error("empty trajectory");
  double sup = 0.0;
  double quad = 0.0;
  double prev_t = 0.0;
  double prev_sq = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i < traj.nodes(); ++i) {
    if (!traj.has_state(i)) continue;
    const SpectralField& u = traj.state(i);
    const double t = traj.times()[i];
    sup = std::max(sup, u.sobolev_norm(s));
    const double half_sq = std::pow(u.sobolev_norm(s + 0.5), 2);
    if (have_prev) quad += 0.5 * (t - prev_t) * (half_sq + prev_sq);
    prev_t = t;
    prev_sq = half_sq;
    have_prev = true;
  }
  return {sup, std::sqrt(quad)};
}

DecayFit fit_decay(const Trajectory& traj, double window_start, double window_end) {
  if (traj.nodes() == 0) throw validation_error("empty trajectory");
  if (window_start < 0.0 || window_end > traj.horizon() + 1e-12 ||
      window_start >= window_end)
    throw validation_error("fit window must lie inside [0, T]");

  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < traj.nodes(); ++i) {
    const double t = traj.times()[i];
    if (t < window_start || t > window_end) continue;
    const double n = traj.ledger()[i].l2_norm;
    if (n <= 0.0) throw validation_error("degenerate fit: zero norm inside the window");
    ts.push_back(t);
    logs.push_back(std::log(n));
  }
  if (ts.size() < 2) throw validation_error("fit window holds fewer than two samples");

  const double n = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += logs[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * logs[i];
  }
  const double denom = n * stt - st * st;
  const double slope = (n * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / n;

  double rss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = logs[i] - (intercept + slope * ts[i]);
    rss += r * r;
  }

  DecayFit fit;
  fit.rate = -slope;
  const double u0 = traj.ledger().front().l2_norm;
  fit.prefactor = u0 > 0.0 ? std::exp(intercept) / u0 : 0.0;
  fit.window_start = window_start;
  fit.window_end = window_end;
  fit.residual = std::sqrt(rss / n);
  return fit;
}

ObservabilityReport observability_ratio(const SpectralField& u0,
                                        const EvolutionParams& params) {
  if (!params.damping_on) throw validation_error("observability requires damping");
  if (u0.l2_norm() == 0.0) throw validation_error("observability requires u0 != 0");
  const Trajectory traj = evolve(u0, params);
  const LedgerRow& last = traj.ledger().back();

  ObservabilityReport rep;
  rep.numerator = u0.l2_norm() * u0.l2_norm();
  rep.denominator = last.eps_dissipation_cum + last.damping_dissipation_cum;
  rep.degenerate = rep.denominator <= 1e-300;
  rep.ratio = rep.degenerate ? 0.0 : rep.numerator / rep.denominator;
  rep.epsilon = params.epsilon;
  rep.horizon = traj.horizon();
  rep.truncation = u0.truncation();
  return rep;
}

ViscositySweepReport viscosity_sweep(const SpectralField& u0,
                                     const std::vector<double>& eps_list,
                                     const EvolutionParams& params) {
  if (eps_list.empty()) throw validation_error("empty viscosity list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (eps_list[i] <= 0.0)
      throw validation_error("viscosity entries must be positive");
    if (i > 0 && eps_list[i] >= eps_list[i - 1])
      throw validation_error("viscosity list must be strictly decreasing");
  }

  std::vector<std::future<Trajectory>> jobs;
  jobs.reserve(eps_list.size());
  for (double eps : eps_list) {
    EvolutionParams p = params;
    p.epsilon = eps;
    p.state_stride = 1;
    jobs.push_back(std::async(std::launch::async,
                              [p, u0]() { return evolve(u0, p); }));
  }
  std::vector<Trajectory> runs;
  runs.reserve(jobs.size());
  for (auto& j : jobs) runs.push_back(j.get());

  ViscositySweepReport rep;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const LedgerRow& last = runs[i].ledger().back();
    rep.entries.push_back({eps_list[i], last.smoothing_budget_cum, last.l2_norm,
                           last.energy_residual});
  }
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    double worst = 0.0;
    for (std::size_t nd = 0; nd < runs[i].nodes(); ++nd) {
      SpectralField d = runs[i].state(nd);
      d -= runs[i + 1].state(nd);
      worst = std::max(worst, d.l2_norm());
    }
    rep.successive_distances.push_back(worst);
  }
  return rep;
}

}  // namespace bo
