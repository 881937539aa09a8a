#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "bo/diagnostics.hpp"
#include "bo/errors.hpp"
#include "bo/harness.hpp"
#include "oracles.hpp"

using namespace bo;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const DampingProfile> default_bump() {
  return std::make_shared<DampingProfile>(DampingProfile::bump(kPi, kPi, 128));
}

EvolutionParams damped_params(double horizon, double dt, double eps = 0.0) {
  EvolutionParams p;
  p.alpha = 1.0;
  p.epsilon = eps;
  p.damping_on = true;
  p.profile = default_bump();
  p.horizon = horizon;
  p.dt = dt;
  return p;
}

}  // namespace

TEST_CASE("conserved functionals of harmonics and zero") {
  const auto [i1_cos, i2_cos] = conserved_functionals(SpectralField::harmonic(8, 1, 1.0));
  CHECK(i1_cos == 0.0);
  CHECK(i2_cos == doctest::Approx(kPi).epsilon(1e-14));

  const auto [i1_zero, i2_zero] = conserved_functionals(SpectralField(8));
  CHECK(i1_zero == 0.0);
  CHECK(i2_zero == 0.0);
}

TEST_CASE("conserved functionals match quadrature on random fields") {
  for (std::uint64_t seed : {3u, 4u}) {
    const SpectralField u = random_initial(seed, 1.3, 0.5, 42);
    const auto [i1, i2] = conserved_functionals(u);
    const double q1 = oracles::quadrature([&](double x) { return oracles::eval_field(u, x); });
    const double q2 =
        oracles::quadrature([&](double x) { return std::pow(oracles::eval_field(u, x), 2); });
    CHECK(std::abs(i1 - q1) < 1e-12);
    CHECK(std::abs(i2 - q2) < 1e-12);
  }
}

TEST_CASE("trajectory norms of a phase-rotating harmonic") {
  EvolutionParams p;
  p.alpha = 0.0;
  p.epsilon = 0.0;
  p.damping_on = false;
  p.horizon = 1.0;
  p.dt = 1e-3;
  const Trajectory traj = evolve(SpectralField::harmonic(42, 1, 1.0), p);
  const auto [sup, l2_time] = trajectory_norms(traj, 0.0);
  CHECK(sup == doctest::Approx(std::sqrt(kPi)).epsilon(1e-10));
  // ||cos x||_{1/2} = (sqrt(2) pi)^{1/2}, constant in time
  CHECK(l2_time == doctest::Approx(std::sqrt(std::sqrt(2.0) * kPi)).epsilon(1e-10));
}

TEST_CASE("trajectory norms of the zero trajectory") {
  EvolutionParams p = damped_params(0.2, 1e-3);
  const Trajectory traj = evolve(SpectralField(42), p);
  const auto [sup, l2_time] = trajectory_norms(traj, 0.0);
  CHECK(sup == 0.0);
  CHECK(l2_time == 0.0);
}

TEST_CASE("trajectory norms are stable under snapshot refinement") {
  const SpectralField u0 = random_initial(7, 1.0, 1.0, 42);
  EvolutionParams p = damped_params(1.0, 1e-3, 1e-2);
  p.state_stride = 2;
  const auto coarse = trajectory_norms(evolve(u0, p), 0.0);
  p.state_stride = 1;
  const auto fine = trajectory_norms(evolve(u0, p), 0.0);
  CHECK(std::abs(coarse.second - fine.second) < 1e-6);
  CHECK(coarse.first == doctest::Approx(fine.first).epsilon(1e-12));
}

TEST_CASE("decay fit recovers a planted exponential exactly") {
  std::vector<double> times, norms;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.1 * i;
    times.push_back(t);
    norms.push_back(2.0 * std::exp(-0.5 * t));
  }
  const Trajectory synthetic = Trajectory::from_norm_history(times, norms);
  const DecayFit fit = fit_decay(synthetic, 0.0, 10.0);
  CHECK(fit.rate == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.prefactor == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.residual < 1e-12);
}

TEST_CASE("decay fit of a constant history is flat") {
  std::vector<double> times, norms;
  for (int i = 0; i <= 50; ++i) {
    times.push_back(0.02 * i);
    norms.push_back(3.0);
  }
  const DecayFit fit = fit_decay(Trajectory::from_norm_history(times, norms), 0.0, 1.0);
  CHECK(std::abs(fit.rate) < 1e-13);
}

TEST_CASE("decay fit rejects degenerate windows") {
  std::vector<double> times{0.0, 0.5, 1.0};
  std::vector<double> norms{1.0, 0.0, 1.0};
  const Trajectory history = Trajectory::from_norm_history(times, norms);
  CHECK_THROWS_AS(fit_decay(history, 0.0, 1.0), validation_error);
  CHECK_THROWS_AS(fit_decay(history, -1.0, 0.5), validation_error);
  CHECK_THROWS_AS(fit_decay(history, 0.8, 0.2), validation_error);
}

TEST_CASE("closed-loop decay rate is positive, with vanishing-viscosity stability") {
  const SpectralField u0 = random_initial(11, 1.0, 0.0, 42);
  std::vector<double> rates;
  for (double eps : {0.0, 1e-3, 1e-2}) {
    EvolutionParams p = damped_params(20.0, 0.0, eps);
    p.dt = p.cfl_dt(u0);
    const Trajectory traj = closed_loop_feedback(u0, DampingLaw::kGDG, p);
    const DecayFit fit = fit_decay(traj, 5.0, 20.0);
    CHECK(fit.rate > 0.0);
    rates.push_back(fit.rate);
  }
  // The fitted rate converges as eps -> 0; at eps = 1e-2 the viscous term
  // still contributes ~eps to the rate of the slowest (k = +-1) mode, so only
  // the small-viscosity pair is held to a tight stability margin here.  The
  // full sweep is reported by the acceptance suite.
  CHECK(std::abs(rates[1] - rates[0]) / rates[0] < 0.1);
  CHECK(rates[2] > rates[0]);
  MESSAGE("fitted rates: ", rates[0], " ", rates[1], " ", rates[2]);
}

TEST_CASE("observability report on a state supported in the damped region") {
  // G(random) is supported where the weight is; the denominator sees it at once.
  const auto profile = default_bump();
  SpectralField u0 = apply_G(random_initial(13, 1.0, 0.0, 42), *profile);
  u0 *= 1.0 / u0.l2_norm();
  EvolutionParams p = damped_params(1.0, 2e-3, 1e-2);
  const ObservabilityReport rep = observability_ratio(u0, p);
  CHECK(!rep.degenerate);
  CHECK(rep.denominator > 0.0);
  CHECK(rep.numerator == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isfinite(rep.ratio));
  CHECK(rep.ratio < 50.0);
}

TEST_CASE("observability rejects zero data and requires damping") {
  EvolutionParams p = damped_params(1.0, 1e-2);
  CHECK_THROWS_AS(observability_ratio(SpectralField(42), p), validation_error);
  p.damping_on = false;
  CHECK_THROWS_AS(observability_ratio(random_initial(1, 1.0, 0.0, 42), p),
                  validation_error);
}

TEST_CASE("viscosity sweep is Cauchy with stable smoothing budgets") {
  const SpectralField u0 = random_initial(17, 1.0, 2.0, 42);
  EvolutionParams p = damped_params(1.0, 2e-3);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  const ViscositySweepReport rep = viscosity_sweep(u0, eps, p);
  REQUIRE(rep.entries.size() == 4);
  REQUIRE(rep.successive_distances.size() == 3);
  for (std::size_t i = 1; i < rep.successive_distances.size(); ++i)
    CHECK(rep.successive_distances[i] < rep.successive_distances[i - 1]);
  double lo = 1e300, hi = 0.0;
  for (const auto& e : rep.entries) {
    lo = std::min(lo, e.smoothing_budget);
    hi = std::max(hi, e.smoothing_budget);
  }
  CHECK(hi / lo - 1.0 < 0.2);
}

TEST_CASE("viscosity sweep edge cases") {
  const SpectralField u0 = random_initial(19, 1.0, 0.0, 42);
  EvolutionParams p = damped_params(0.2, 2e-3);
  const ViscositySweepReport single = viscosity_sweep(u0, {1e-2}, p);
  CHECK(single.successive_distances.empty());
  CHECK_THROWS_AS(viscosity_sweep(u0, {1e-2, 1e-1}, p), validation_error);
  CHECK_THROWS_AS(viscosity_sweep(u0, {1e-2, -1.0}, p), validation_error);
  CHECK_THROWS_AS(viscosity_sweep(u0, {}, p), validation_error);
}

TEST_CASE("observability constant estimate is stable under sample doubling") {
  EvolutionParams p = damped_params(1.0, 5e-3, 1e-2);
  auto max_ratio = [&](int samples) {
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
      const SpectralField u0 =
          random_initial(static_cast<std::uint64_t>(3000 + i), 1.0, 0.0, 42);
      worst = std::max(worst, observability_ratio(u0, p).ratio);
    }
    return worst;
  };
  const double hundred = max_ratio(100);
  const double two_hundred = max_ratio(200);
  CHECK(std::isfinite(two_hundred));
  CHECK(two_hundred >= hundred);          // max over a superset of seeds
  CHECK(two_hundred / hundred < 1.25);    // stable estimate of the constant
  MESSAGE("max observability ratio: ", hundred, " (100 seeds) -> ", two_hundred,
          " (200 seeds)");
}
