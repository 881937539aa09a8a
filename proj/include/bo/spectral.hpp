#ifndef BO_SPECTRAL_HPP
#define BO_SPECTRAL_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace bo {

using Complex = std::complex<double>;

/// Smallest power-of-two grid size M with floor(M/3) >= truncation.
std::size_t grid_for_truncation(int truncation);

/// Retained band floor(M/3) of a power-of-two grid of size M.
int truncation_for_grid(std::size_t grid_size);

/// Real-valued zero-mean-capable function on the 2pi-periodic torus, stored as
/// Hermitian-symmetric Fourier coefficients u_hat[k], |k| <= K.  Coefficients
/// follow the convention u_hat[k] = (1/M) sum_j u(x_j) e^{-ik x_j}, so they
/// coincide with continuous Fourier coefficients for band-limited fields and
/// the Parseval identity reads  int |u|^2 dx = 2pi sum |u_hat[k]|^2.
class SpectralField {
 public:
  SpectralField() : SpectralField(1) {}
  explicit SpectralField(int truncation);

  /// Forward transform of M real samples (M a power of two); modes above
  /// floor(M/3) and the Nyquist mode are zeroed, Hermitian symmetry is exact
  /// by construction.
  static SpectralField from_samples(std::span<const double> samples);

  /// amplitude*cos(k x + phase) embedded at the given truncation.
  static SpectralField harmonic(int truncation, int k, double amplitude,
                                double phase = 0.0);

  int truncation() const { return truncation_; }
  std::size_t grid_size() const { return grid_for_truncation(truncation_); }

  /// Coefficient u_hat[k], |k| <= truncation.
  const Complex& coeff(int k) const { return coef_[static_cast<std::size_t>(k + truncation_)]; }

  /// Sets u_hat[k] = c and u_hat[-k] = conj(c) (k = 0 forces a real value).
  void set_mode_pair(int k, Complex c);

  std::span<const Complex> raw() const { return coef_; }
  std::span<Complex> raw() { return coef_; }

  /// Inverse transform to grid samples; the imaginary residue is checked
  /// (error above 1e-10) and discarded.
  std::vector<double> to_samples() const;

  double mean() const;  // int u dx = 2pi u_hat[0]
  double l2_norm() const;
  double sobolev_norm(double s) const;  // (2pi sum (1+k^2)^s |u_hat|^2)^(1/2)

  bool is_zero_mean(double tol = 1e-13) const;
  void zero_mean() { coef_[static_cast<std::size_t>(truncation_)] = 0.0; }

  SpectralField& operator+=(const SpectralField& rhs);
  SpectralField& operator-=(const SpectralField& rhs);
  SpectralField& operator*=(double scale);

  friend SpectralField operator+(SpectralField lhs, const SpectralField& rhs) { return lhs += rhs; }
  friend SpectralField operator-(SpectralField lhs, const SpectralField& rhs) { return lhs -= rhs; }
  friend SpectralField operator*(double s, SpectralField f) { return f *= s; }

 private:
  int truncation_;
  std::vector<Complex> coef_;  // index k + truncation_, k in [-K, K]
};

/// Copy with the retained band widened (zero padding) or narrowed (modes
/// dropped).
SpectralField change_truncation(const SpectralField& u, int truncation);

/// L^2(T) pairing  int u v dx  computed spectrally.
double inner_product(const SpectralField& u, const SpectralField& v);

/// H^s pairing with Bessel weights (1+k^2)^s.
double inner_product_sobolev(const SpectralField& u, const SpectralField& v, double s);

// --- Fourier-multiplier calculus -------------------------------------------

/// Hilbert transform, multiplier -i sgn(k).
SpectralField hilbert(const SpectralField& u);

/// d/dx, multiplier ik.
SpectralField derivative(const SpectralField& u);

/// |D|^s, multiplier |k|^s with mode 0 fixed at zero.  s < 0 requires a
/// zero-mean field.
SpectralField fractional_derivative(const SpectralField& u, double s);

/// (1 - d^2/dx^2)^{s/2}, multiplier (1+k^2)^{s/2}.
SpectralField bessel_potential(const SpectralField& u, double s);

// --- Localized damping weight -----------------------------------------------

/// Smooth nonnegative weight a(x) with unit integral; defines the localized
/// operator  G u = a (u - int a u dx).
class DampingProfile {
 public:
  /// C-infinity bump c*exp(-1/(1-t^2)), t = 2(x-center)/width, normalized so
  /// the trapezoidal integral over the grid is exactly 1.
  static DampingProfile bump(double center, double width, std::size_t grid_size);

  /// Arbitrary nonnegative samples with unit trapezoidal integral (validated).
  static DampingProfile from_samples(std::vector<double> samples);

  std::size_t grid_size() const { return samples_.size(); }
  std::span<const double> samples() const { return samples_; }
  const SpectralField& coefficients() const { return coefficients_; }

  double support_left() const { return support_left_; }
  double support_right() const { return support_right_; }

  /// a-weighted mean  int a u dx  by trapezoidal quadrature on the grid.
  double weighted_mean(std::span<const double> u_samples) const;

 private:
  DampingProfile(std::vector<double> samples, double left, double right);

  std::vector<double> samples_;
  SpectralField coefficients_;  // truncated to the grid band
  double support_left_ = 0.0;
  double support_right_ = 0.0;
};

/// G u = a (u - int a u dx); physical-space product, output truncated to the
/// field band with the zero mean enforced exactly.
SpectralField apply_G(const SpectralField& u, const DampingProfile& a);

/// G(D(G u)) — the damping feedback operator; self-adjoint and positive
/// semidefinite, (GDGu, u) = ||D^{1/2} G u||^2.
SpectralField apply_GDG(const SpectralField& u, const DampingProfile& a);

/// G(G u), the quadratic-mask comparison law.
SpectralField apply_GG(const SpectralField& u, const DampingProfile& a);

/// Dealiased pointwise product; exact for inputs band-limited to the shared
/// truncation (2/3 rule).
SpectralField multiply_dealiased(const SpectralField& u, const SpectralField& v);

// --- Frequency projectors and the commutator probe --------------------------

/// Mode set N ⊆ Z with decidable membership; P projects onto span{e^{ikx}, k in N}.
struct ProjectorSpec {
  enum class Kind { kPositiveModes, kFiniteSet, kArithmeticProgression };

  Kind kind = Kind::kPositiveModes;
  std::vector<int> modes;  // kFiniteSet
  int offset = 0;          // kArithmeticProgression: offset + stride*Z
  int stride = 1;
  bool complement = false;

  bool contains(int k) const;

  static ProjectorSpec positive_modes();
  static ProjectorSpec finite_set(std::vector<int> modes, bool complement = false);
  static ProjectorSpec progression(int offset, int stride);
};

SpectralField apply_projector(const SpectralField& u, const ProjectorSpec& p);

/// Complex trigonometric polynomial sum_{|k|<=K} c_k e^{ikx} without the
/// Hermitian constraint; carrier for complex symbols and commutator outputs.
class ModeSeries {
 public:
  ModeSeries() : ModeSeries(0) {}
  explicit ModeSeries(int truncation)
      : truncation_(truncation), coef_(static_cast<std::size_t>(2 * truncation + 1)) {}
  explicit ModeSeries(const SpectralField& f);

  /// One complex exponential e^{ikx}.
  static ModeSeries exponential(int k, Complex amplitude = 1.0);

  int truncation() const { return truncation_; }
  Complex& coeff(int k) { return coef_[static_cast<std::size_t>(k + truncation_)]; }
  const Complex& coeff(int k) const { return coef_[static_cast<std::size_t>(k + truncation_)]; }

  double l2_norm() const;  // (2pi sum |c_k|^2)^(1/2)

 private:
  int truncation_;
  std::vector<Complex> coef_;
};

/// d^p/dx^p [a, P] d^q/dx^q v evaluated by the exact Fourier double sum
///   sum_n ( sum_k a_hat[n-k] (ik)^q v_hat[k] (1_N(k) - 1_N(n)) ) (in)^p e^{inx}.
/// Supports p, q <= 8; the output band is truncation(a) + truncation(v).
ModeSeries commutator_projector(const ModeSeries& a, const ProjectorSpec& p_spec,
                                int p, int q, const ModeSeries& v);

/// Convenience overload for a real smooth weight and real field.
ModeSeries commutator_projector(const SpectralField& a, const ProjectorSpec& p_spec,
                                int p, int q, const SpectralField& v);

}  // namespace bo

#endif
