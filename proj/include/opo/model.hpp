#pragma once

// Parameterization, nondimensional Ito dynamics and quadrature transform for
// the three-mode parametric oscillator in the positive-P representation.
//
// Time is measured in units of the down-converted damping, tau = gamma * t,
// so signal/idler decay at rate 1 and the pump decays at rate gamma_r.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace opo {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

/// Dimensionless configuration (mu, gamma_r, g) with the derived coupling
/// eps = g * sqrt(2 gamma_r) = chi / gamma.
class ModelParams {
public:
  ModelParams() = default;

  /// Throws std::domain_error unless mu >= 0, gamma_r > 0 and g > 0.
  ModelParams(double mu, double gamma_r, double g)
      : mu_(mu), gamma_r_(gamma_r), g_(g), eps_(g * std::sqrt(2.0 * gamma_r)) {
    if (!(mu >= 0.0) || !std::isfinite(mu))
      throw std::domain_error("ModelParams: mu must be finite and >= 0");
    if (!(gamma_r > 0.0) || !std::isfinite(gamma_r))
      throw std::domain_error("ModelParams: gamma_r must be finite and > 0");
    if (!(g > 0.0) || !std::isfinite(g))
      throw std::domain_error("ModelParams: g must be finite and > 0");
  }

  double mu() const { return mu_; }
  double gamma_r() const { return gamma_r_; }
  double g() const { return g_; }
  double eps() const { return eps_; }

  bool below_threshold() const { return mu_ < 1.0; }

  /// Pump amplitude at the deterministic fixed point, mu / eps.
  double pump_fixed_point() const { return mu_ / eps_; }

  /// Scale factor of the pump quadratures, g * sqrt(2 gamma_r) (== eps).
  double pump_quadrature_scale() const { return eps_; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
  double mu_ = 0.0;
  double gamma_r_ = 1.0;
  double g_ = 1.0;
  double eps_ = std::sqrt(2.0);
};

/// Builds parameters from the physical ratio chi/gamma: g = (chi/gamma)/sqrt(2 gamma_r).
inline ModelParams derive_params(double chi_over_gamma, double gamma_r, double mu) {
  if (!(chi_over_gamma > 0.0))
    throw std::domain_error("derive_params: chi/gamma must be > 0");
  if (!(gamma_r > 0.0))
    throw std::domain_error("derive_params: gamma_r must be > 0");
  if (!(mu >= 0.0))
    throw std::domain_error("derive_params: mu must be >= 0");
  return ModelParams(mu, gamma_r, chi_over_gamma / std::sqrt(2.0 * gamma_r));
}

/// The six independent positive-P amplitudes.
struct PhaseSpaceState {
  cplx a0{}, a1{}, a2{};
  cplx a0p{}, a1p{}, a2p{};

  bool finite() const {
    for (const cplx& v : {a0, a1, a2, a0p, a1p, a2p})
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  /// Largest modulus over the six components.
  double max_abs() const {
    double m = 0.0;
    for (const cplx& v : {a0, a1, a2, a0p, a1p, a2p}) m = std::max(m, std::abs(v));
    return m;
  }

  friend PhaseSpaceState operator+(const PhaseSpaceState& l, const PhaseSpaceState& r) {
    return {l.a0 + r.a0, l.a1 + r.a1, l.a2 + r.a2, l.a0p + r.a0p, l.a1p + r.a1p, l.a2p + r.a2p};
  }
  friend PhaseSpaceState operator*(cplx s, const PhaseSpaceState& v) {
    return {s * v.a0, s * v.a1, s * v.a2, s * v.a0p, s * v.a1p, s * v.a2p};
  }
  friend bool operator==(const PhaseSpaceState&, const PhaseSpaceState&) = default;
};

/// Deterministic below-threshold steady state: pump at mu/eps, no down-converted field.
inline PhaseSpaceState fixed_point(const ModelParams& p) {
  PhaseSpaceState s;
  s.a0 = s.a0p = cplx(p.pump_fixed_point(), 0.0);
  return s;
}

/// Index of each quadrature channel inside QuadratureSample::channels().
enum Channel : int { kX0 = 0, kY0 = 1, kX = 2, kY = 3, kXp = 4, kYp = 5 };
inline constexpr int kNumChannels = 6;
inline constexpr std::array<const char*, kNumChannels> kChannelNames{"x0", "y0", "x", "y", "xp", "yp"};

/// Scaled quadratures plus the raw amplitude products at dimensionless time t.
struct QuadratureSample {
  cplx x0{}, y0{}, x{}, y{}, xp{}, yp{};
  cplx n12{};  // a1p * a1 * a2p * a2
  cplx n0{};   // a0p * a0
  double t = 0.0;

  std::array<cplx, kNumChannels> channels() const { return {x0, y0, x, y, xp, yp}; }
  bool finite() const {
    for (const cplx& v : {x0, y0, x, y, xp, yp, n12, n0})
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

/// Quadrature transform. Conjugate convention: xp = g(a2 + a1p), yp = (g/i)(a2 - a1p),
/// so that x + iy = 2g a1, x - iy = 2g a2p, xp + iyp = 2g a2, xp - iyp = 2g a1p.
inline QuadratureSample alpha_to_quadratures(const PhaseSpaceState& s, const ModelParams& p,
                                             double t = 0.0) {
  const double g = p.g();
  const double gp = p.pump_quadrature_scale();
  QuadratureSample q;
  q.x0 = gp * (s.a0 + s.a0p);
  q.y0 = -kI * gp * (s.a0 - s.a0p);
  q.x = g * (s.a1 + s.a2p);
  q.y = -kI * g * (s.a1 - s.a2p);
  q.xp = g * (s.a2 + s.a1p);
  q.yp = -kI * g * (s.a2 - s.a1p);
  q.n12 = s.a1p * s.a1 * s.a2p * s.a2;
  q.n0 = s.a0p * s.a0;
  q.t = t;
  return q;
}

inline PhaseSpaceState quadratures_to_alpha(const QuadratureSample& q, const ModelParams& p) {
  const double two_g = 2.0 * p.g();
  const double two_gp = 2.0 * p.pump_quadrature_scale();
  PhaseSpaceState s;
  s.a0 = (q.x0 + kI * q.y0) / two_gp;
  s.a0p = (q.x0 - kI * q.y0) / two_gp;
  s.a1 = (q.x + kI * q.y) / two_g;
  s.a2p = (q.x - kI * q.y) / two_g;
  s.a2 = (q.xp + kI * q.yp) / two_g;
  s.a1p = (q.xp - kI * q.yp) / two_g;
  return s;
}

/// Drift rates of the six amplitudes and the two multiplicative noise amplitudes
/// sqrt(eps a0), sqrt(eps a0p) (principal branch).
struct DriftDiffusion {
  PhaseSpaceState drift;
  std::array<cplx, 2> noise_amp{};
};

/// Linear (decay) and nonlinear parts of the drift, split for the exponential stepper.
inline PhaseSpaceState nonlinear_drift(const PhaseSpaceState& s, const ModelParams& p) {
  const double eps = p.eps();
  PhaseSpaceState d;
  d.a0 = -eps * s.a1 * s.a2;
  d.a0p = -eps * s.a1p * s.a2p;
  d.a1 = eps * s.a2p * s.a0;
  d.a2 = eps * s.a1p * s.a0;
  d.a1p = eps * s.a2 * s.a0p;
  d.a2p = eps * s.a1 * s.a0p;
  return d;
}

inline DriftDiffusion drift_and_diffusion(const PhaseSpaceState& s, const ModelParams& p) {
  const double gr = p.gamma_r();
  const double pump = gr * p.pump_fixed_point();
  DriftDiffusion out;
  PhaseSpaceState& d = out.drift;
  d = nonlinear_drift(s, p);
  d.a0 += pump - gr * s.a0;
  d.a0p += pump - gr * s.a0p;
  d.a1 -= s.a1;
  d.a2 -= s.a2;
  d.a1p -= s.a1p;
  d.a2p -= s.a2p;
  out.noise_amp = {std::sqrt(p.eps() * s.a0), std::sqrt(p.eps() * s.a0p)};
  return out;
}

}  // namespace opo
