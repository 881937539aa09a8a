#include "bo/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "bo/errors.hpp"

namespace bo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// FFTW plan cache keyed by grid size.  Plans are created once under a lock
// (the planner is not thread-safe) with FFTW_UNALIGNED so they can be
// re-executed on arbitrary caller buffers via fftw_execute_dft.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

struct PlanCache {
  std::mutex mutex;
  std::unordered_map<std::size_t, PlanPair> plans;
  ~PlanCache() {
    for (auto& [m, pair] : plans) {
      fftw_destroy_plan(pair.forward);
      fftw_destroy_plan(pair.backward);
    }
  }
};

PlanPair& plans_for(std::size_t m) {
  static PlanCache cache;
  std::lock_guard<std::mutex> lock(cache.mutex);
  auto it = cache.plans.find(m);
  if (it != cache.plans.end()) return it->second;
  std::vector<Complex> scratch_in(m), scratch_out(m);
  auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
  auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
  PlanPair pair;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  pair.forward = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, flags);
  pair.backward = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_BACKWARD, flags);
  return cache.plans.emplace(m, pair).first->second;
}

void dft(std::vector<Complex>& buf, bool forward) {
  PlanPair& p = plans_for(buf.size());
  std::vector<Complex> out(buf.size());
  fftw_execute_dft(forward ? p.forward : p.backward,
                   reinterpret_cast<fftw_complex*>(buf.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  buf = std::move(out);
}

// Physical samples of a band-limited field on its grid, kept complex so the
// imaginary residue can be inspected by the caller.
std::vector<Complex> synthesize(const SpectralField& u) {
  const std::size_t m = u.grid_size();
  const int k_max = u.truncation();
  std::vector<Complex> buf(m);
  for (int k = -k_max; k <= k_max; ++k) {
    const std::size_t bin = static_cast<std::size_t>((k + static_cast<int>(m)) % static_cast<int>(m));
    buf[bin] = u.coeff(k);
  }
  dft(buf, /*forward=*/false);
  return buf;
}

double ipow_abs(int k, double s) { return k == 0 ? 0.0 : std::pow(std::abs(k), s); }

// (ik)^e for small nonnegative integer e; avoids std::pow's 0*log(0) NaN.
Complex ipow_ik(int k, int e) {
  if (e == 0) return 1.0;
  static const Complex unit_cycle[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  return unit_cycle[e % 4] * std::pow(static_cast<double>(k), e);
}

}  // namespace

std::size_t grid_for_truncation(int truncation) {
  if (truncation < 1) throw validation_error("truncation must be >= 1");
  std::size_t m = 8;
  while (static_cast<int>(m / 3) < truncation) m *= 2;
  return m;
}

int truncation_for_grid(std::size_t grid_size) {
  if (!is_power_of_two(grid_size) || grid_size < 8)
    throw validation_error("grid size must be a power of two >= 8");
  return static_cast<int>(grid_size / 3);
}

SpectralField::SpectralField(int truncation)
    : truncation_(truncation), coef_(static_cast<std::size_t>(2 * truncation + 1)) {
  if (truncation < 1) throw validation_error("truncation must be >= 1");
}

SpectralField SpectralField::from_samples(std::span<const double> samples) {
  const std::size_t m = samples.size();
  const int k_max = truncation_for_grid(m);  // validates the size
  std::vector<Complex> buf(samples.begin(), samples.end());
  dft(buf, /*forward=*/true);
  SpectralField out(k_max);
  const double scale = 1.0 / static_cast<double>(m);
  out.set_mode_pair(0, scale * buf[0].real());
  for (int k = 1; k <= k_max; ++k)
    out.set_mode_pair(k, scale * buf[static_cast<std::size_t>(k)]);
  return out;
}

SpectralField SpectralField::harmonic(int truncation, int k, double amplitude, double phase) {
  SpectralField out(truncation);
  if (std::abs(k) > truncation) throw validation_error("harmonic mode outside truncation");
  // amplitude cos(kx + phase) = (amplitude/2) e^{i phase} e^{ikx} + c.c.
  out.set_mode_pair(std::abs(k), 0.5 * amplitude * std::polar(1.0, k >= 0 ? phase : -phase));
  return out;
}

void SpectralField::set_mode_pair(int k, Complex c) {
  if (std::abs(k) > truncation_) throw validation_error("mode outside truncation");
  if (k == 0) {
    coef_[static_cast<std::size_t>(truncation_)] = c.real();
    return;
  }
  coef_[static_cast<std::size_t>(k + truncation_)] = c;
  coef_[static_cast<std::size_t>(-k + truncation_)] = std::conj(c);
}

std::vector<double> SpectralField::to_samples() const {
  const std::vector<Complex> buf = synthesize(*this);
  double residue = 0.0;
  for (const Complex& z : buf) residue = std::max(residue, std::abs(z.imag()));
  if (residue > 1e-10)
    throw validation_error("Hermitian symmetry violated: imaginary residue " +
                           std::to_string(residue));
  std::vector<double> out(buf.size());
  for (std::size_t j = 0; j < buf.size(); ++j) out[j] = buf[j].real();
  return out;
}

double SpectralField::mean() const { return kTwoPi * coeff(0).real(); }

double SpectralField::l2_norm() const { return sobolev_norm(0.0); }

double SpectralField::sobolev_norm(double s) const {
  double sum = 0.0;
  for (int k = -truncation_; k <= truncation_; ++k)
    sum += std::pow(1.0 + static_cast<double>(k) * k, s) * std::norm(coeff(k));
  return std::sqrt(kTwoPi * sum);
}

bool SpectralField::is_zero_mean(double tol) const { return std::abs(coeff(0)) <= tol; }

SpectralField& SpectralField::operator+=(const SpectralField& rhs) {
  if (rhs.truncation_ != truncation_) throw validation_error("truncation mismatch");
  for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] += rhs.coef_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& rhs) {
  if (rhs.truncation_ != truncation_) throw validation_error("truncation mismatch");
  for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] -= rhs.coef_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
  for (Complex& c : coef_) c *= scale;
  return *this;
}

SpectralField change_truncation(const SpectralField& u, int truncation) {
  SpectralField out(truncation);
  const int shared = std::min(truncation, u.truncation());
  for (int k = -shared; k <= shared; ++k)
    out.raw()[static_cast<std::size_t>(k + truncation)] = u.coeff(k);
  return out;
}

double inner_product(const SpectralField& u, const SpectralField& v) {
  return inner_product_sobolev(u, v, 0.0);
}

double inner_product_sobolev(const SpectralField& u, const SpectralField& v, double s) {
  if (u.truncation() != v.truncation()) throw validation_error("truncation mismatch");
  double sum = 0.0;
  for (int k = -u.truncation(); k <= u.truncation(); ++k)
    sum += std::pow(1.0 + static_cast<double>(k) * k, s) *
           (u.coeff(k) * std::conj(v.coeff(k))).real();
  return kTwoPi * sum;
}

SpectralField hilbert(const SpectralField& u) {
  SpectralField out = u;
  for (int k = 1; k <= u.truncation(); ++k) {
    out.raw()[static_cast<std::size_t>(k + u.truncation())] *= Complex(0.0, -1.0);
    out.raw()[static_cast<std::size_t>(-k + u.truncation())] *= Complex(0.0, 1.0);
  }
  return out;
}

SpectralField derivative(const SpectralField& u) {
  SpectralField out = u;
  for (int k = -u.truncation(); k <= u.truncation(); ++k)
    out.raw()[static_cast<std::size_t>(k + u.truncation())] *= Complex(0.0, k);
  return out;
}

SpectralField fractional_derivative(const SpectralField& u, double s) {
  if (s < 0.0 && !u.is_zero_mean())
    throw validation_error("negative-order derivative requires a zero-mean field");
  SpectralField out = u;
  for (int k = -u.truncation(); k <= u.truncation(); ++k)
    out.raw()[static_cast<std::size_t>(k + u.truncation())] *= ipow_abs(k, s);
  return out;
}

SpectralField bessel_potential(const SpectralField& u, double s) {
  SpectralField out = u;
  for (int k = -u.truncation(); k <= u.truncation(); ++k)
    out.raw()[static_cast<std::size_t>(k + u.truncation())] *=
        std::pow(1.0 + static_cast<double>(k) * k, 0.5 * s);
  return out;
}

// --- DampingProfile ----------------------------------------------------------

DampingProfile::DampingProfile(std::vector<double> samples, double left, double right)
    : samples_(std::move(samples)),
      coefficients_(SpectralField::from_samples(samples_)),
      support_left_(left),
      support_right_(right) {}

DampingProfile DampingProfile::bump(double center, double width, std::size_t grid_size) {
  if (width <= 0.0 || width >= kTwoPi)
    throw validation_error("bump width must lie in (0, 2pi)");
  truncation_for_grid(grid_size);  // validates
  const std::size_t m = grid_size;
  std::vector<double> samples(m, 0.0);
  double integral = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double x = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
    double d = x - center;  // periodic distance in [-pi, pi)
    d -= kTwoPi * std::floor((d + std::numbers::pi) / kTwoPi);
    const double t = 2.0 * d / width;
    if (std::abs(t) < 1.0) samples[j] = std::exp(-1.0 / (1.0 - t * t));
    integral += samples[j];
  }
  integral *= kTwoPi / static_cast<double>(m);
  if (integral <= 0.0) throw validation_error("bump support does not meet the grid");
  for (double& v : samples) v /= integral;
  double left = center - 0.5 * width;
  left -= kTwoPi * std::floor(left / kTwoPi);
  double right = center + 0.5 * width;
  right -= kTwoPi * std::floor(right / kTwoPi);
  return DampingProfile(std::move(samples), left, right);
}

DampingProfile DampingProfile::from_samples(std::vector<double> samples) {
  truncation_for_grid(samples.size());  // validates
  double integral = 0.0;
  for (double v : samples) {
    if (v < 0.0) throw validation_error("damping weight must be nonnegative");
    integral += v;
  }
  integral *= kTwoPi / static_cast<double>(samples.size());
  if (std::abs(integral - 1.0) > 1e-12)
    throw validation_error("damping weight must integrate to 1 (got " +
                           std::to_string(integral) + ")");
  return DampingProfile(std::move(samples), 0.0, kTwoPi);
}

double DampingProfile::weighted_mean(std::span<const double> u_samples) const {
  if (u_samples.size() != samples_.size()) throw validation_error("grid mismatch");
  double sum = 0.0;
  for (std::size_t j = 0; j < samples_.size(); ++j) sum += samples_[j] * u_samples[j];
  return sum * kTwoPi / static_cast<double>(samples_.size());
}

SpectralField apply_G(const SpectralField& u, const DampingProfile& a) {
  if (u.grid_size() != a.grid_size()) throw validation_error("grid mismatch");
  std::vector<double> samples = u.to_samples();
  const double m = a.weighted_mean(samples);
  std::span<const double> aw = a.samples();
  for (std::size_t j = 0; j < samples.size(); ++j) samples[j] = aw[j] * (samples[j] - m);
  SpectralField out = change_truncation(SpectralField::from_samples(samples), u.truncation());
  out.zero_mean();
  return out;
}

SpectralField apply_GDG(const SpectralField& u, const DampingProfile& a) {
  if (!u.is_zero_mean()) throw validation_error("GDG requires a zero-mean field");
  return apply_G(fractional_derivative(apply_G(u, a), 1.0), a);
}

SpectralField apply_GG(const SpectralField& u, const DampingProfile& a) {
  if (!u.is_zero_mean()) throw validation_error("GG requires a zero-mean field");
  return apply_G(apply_G(u, a), a);
}

SpectralField multiply_dealiased(const SpectralField& u, const SpectralField& v) {
  if (u.truncation() != v.truncation()) throw validation_error("grid mismatch");
  std::vector<Complex> ub = synthesize(u);
  const std::vector<Complex> vb = synthesize(v);
  for (std::size_t j = 0; j < ub.size(); ++j)
    ub[j] = Complex(ub[j].real() * vb[j].real(), 0.0);
  dft(ub, /*forward=*/true);
  SpectralField out(u.truncation());
  const double scale = 1.0 / static_cast<double>(ub.size());
  out.set_mode_pair(0, scale * ub[0].real());
  const int kept = std::min(u.truncation(), truncation_for_grid(ub.size()));
  for (int k = 1; k <= kept; ++k)
    out.set_mode_pair(k, scale * ub[static_cast<std::size_t>(k)]);
  return out;
}

// --- Projectors and the commutator probe -------------------------------------

bool ProjectorSpec::contains(int k) const {
  bool in = false;
  switch (kind) {
    case Kind::kPositiveModes:
      in = k >= 1;
      break;
    case Kind::kFiniteSet:
      in = std::find(modes.begin(), modes.end(), k) != modes.end();
      break;
    case Kind::kArithmeticProgression: {
      const int r = ((k - offset) % stride + stride) % stride;
      in = r == 0;
      break;
    }
  }
  return complement ? !in : in;
}

ProjectorSpec ProjectorSpec::positive_modes() { return ProjectorSpec{}; }

ProjectorSpec ProjectorSpec::finite_set(std::vector<int> modes, bool complement) {
  ProjectorSpec p;
  p.kind = Kind::kFiniteSet;
  p.modes = std::move(modes);
  p.complement = complement;
  return p;
}

ProjectorSpec ProjectorSpec::progression(int offset, int stride) {
  if (stride < 1) throw validation_error("progression stride must be >= 1");
  ProjectorSpec p;
  p.kind = Kind::kArithmeticProgression;
  p.offset = offset;
  p.stride = stride;
  return p;
}

SpectralField apply_projector(const SpectralField& u, const ProjectorSpec& p) {
  SpectralField out(u.truncation());
  for (int k = -u.truncation(); k <= u.truncation(); ++k)
    if (p.contains(k))
      out.raw()[static_cast<std::size_t>(k + u.truncation())] = u.coeff(k);
  return out;
}

ModeSeries::ModeSeries(const SpectralField& f)
    : truncation_(f.truncation()),
      coef_(f.raw().begin(), f.raw().end()) {}

ModeSeries ModeSeries::exponential(int k, Complex amplitude) {
  ModeSeries s(std::abs(k) == 0 ? 1 : std::abs(k));
  s.coeff(k) = amplitude;
  return s;
}

double ModeSeries::l2_norm() const {
  double sum = 0.0;
  for (const Complex& c : coef_) sum += std::norm(c);
  return std::sqrt(kTwoPi * sum);
}

ModeSeries commutator_projector(const ModeSeries& a, const ProjectorSpec& p_spec,
                                int p, int q, const ModeSeries& v) {
  if (p < 0 || q < 0 || p > 8 || q > 8)
    throw validation_error("commutator derivative orders must lie in [0, 8]");
  const int ka = a.truncation();
  const int kv = v.truncation();
  const int kn = ka + kv;
  ModeSeries out(kn);
  for (int n = -kn; n <= kn; ++n) {
    const bool n_in = p_spec.contains(n);
    Complex sum = 0.0;
    const int k_lo = std::max(-kv, n - ka);
    const int k_hi = std::min(kv, n + ka);
    for (int k = k_lo; k <= k_hi; ++k) {
      const bool k_in = p_spec.contains(k);
      if (k_in == n_in) continue;
      sum += a.coeff(n - k) * ipow_ik(k, q) * v.coeff(k) * (k_in ? 1.0 : -1.0);
    }
    out.coeff(n) = sum * ipow_ik(n, p);
  }
  return out;
}

ModeSeries commutator_projector(const SpectralField& a, const ProjectorSpec& p_spec,
                                int p, int q, const SpectralField& v) {
  return commutator_projector(ModeSeries(a), p_spec, p, q, ModeSeries(v));
}

}  // namespace bo
