#pragma once

// Closed-form perturbative predictions below threshold, to fourth order in g.
//
// Quadrature-normalized values throughout. Amplitude-normalized moments follow
// from the transform: <da1+ da1 da2+ da2> = q4 / (16 g^4),
// <da0+ da0> = (vx0 + vy0) / (8 gamma_r g^2), |<da1 da2 da0>|^2 = s^2 / (128 g^6 gamma_r).

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "opo/log.hpp"
#include "opo/model.hpp"

namespace opo::analytic {

/// Above this pump parameter the expansion is flagged as unreliable.
inline constexpr double kNearThreshold = 0.9;

/// Throws std::domain_error for mu >= 1; warns for mu > 0.9.
inline void require_below_threshold(const ModelParams& p, const char* what) {
  if (!p.below_threshold())
    throw std::domain_error(std::string(what) + ": perturbative predictions require mu < 1");
  if (p.mu() > kNearThreshold)
    warn(std::string(what) + ": near-threshold: perturbative oracle unreliable (mu = " + std::to_string(p.mu()) + ")");
}

struct ZerothOrder {
  double x0 = 0, y0 = 0, x = 0, y = 0, xp = 0, yp = 0;
};

inline ZerothOrder zeroth_order(const ModelParams& p) {
  require_below_threshold(p, "zeroth_order");
  ZerothOrder z;
  z.x0 = 2.0 * p.mu();
  return z;
}

struct TripleCorrelations {
  double t1 = 0;  // <dx dx+ dx0>
  double t2 = 0;  // <dy dy+ dx0>
  double t3 = 0;  // <dy dx+ dy0>
  double t4 = 0;  // <dx dy+ dy0>

  /// Combination entering the Cauchy-Schwarz right-hand side, -t1 + t2 + t3 + t4.
  double s() const { return -t1 + t2 + t3 + t4; }
};

inline TripleCorrelations triple_correlations(const ModelParams& p) {
  require_below_threshold(p, "triple_correlations");
  const double mu = p.mu(), gr = p.gamma_r();
  const double g4 = std::pow(p.g(), 4);
  const double a = mu / (1.0 - mu);
  const double b = mu / (1.0 + mu);
  TripleCorrelations t;
  t.t1 = -g4 * a * a * (2.0 / (1.0 + mu) + gr / (gr + 2.0 * (1.0 - mu)));
  t.t2 = g4 * b * b * (2.0 / (1.0 - mu) + gr / (gr + 2.0 * (1.0 + mu)));
  t.t3 = g4 * (mu * mu / (1.0 - mu * mu)) * (gr / (2.0 + gr));
  t.t4 = t.t3;
  return t;
}

struct SecondMoments {
  double q4 = 0;   // <(dx^2 + dy^2)(dx+^2 + dy+^2)>
  double vx0 = 0;  // <dx0^2>
  double vy0 = 0;  // <dy0^2>, taken as negligible
};

inline SecondMoments second_moments(const ModelParams& p) {
  require_below_threshold(p, "second_moments");
  const double mu = p.mu(), gr = p.gamma_r();
  const double g4 = std::pow(p.g(), 4);
  const double a = mu / (1.0 - mu);
  const double r = (1.0 - mu) / (1.0 + mu);
  SecondMoments m;
  m.q4 = 2.0 * g4 * mu * mu * (1.0 / ((1.0 - mu) * (1.0 - mu)) + 1.0 / ((1.0 + mu) * (1.0 + mu)));
  m.vx0 = g4 * a * a *
          (std::pow(2.0 / (1.0 + mu), 2) + (1.0 + r * r) * gr * gr / (gr * gr + 4.0 * (1.0 - mu) * (1.0 - mu)));
  m.vy0 = 0.0;
  return m;
}

/// Both sides of <n12><n0> >= |<a1 a2 a0>|^2 in quadrature normalization.
struct CsSides {
  double lhs = 0;
  double rhs = 0;
  /// rhs / lhs; empty when both sides vanish ("no signal").
  std::optional<double> ratio;

  bool violated() const { return ratio && *ratio > 1.0; }
};

inline CsSides cs_sides_analytic(const ModelParams& p) {
  const TripleCorrelations t = triple_correlations(p);
  const SecondMoments m = second_moments(p);
  CsSides cs;
  cs.lhs = m.q4 * (m.vx0 + m.vy0);
  cs.rhs = t.s() * t.s();
  if (cs.lhs > 0.0) cs.ratio = cs.rhs / cs.lhs;
  return cs;
}

/// Factor converting quadrature-normalized Cauchy-Schwarz sides to amplitude normalization.
inline double amplitude_cs_scale(const ModelParams& p) {
  return 1.0 / (128.0 * std::pow(p.g(), 6) * p.gamma_r());
}

/// Steady-state second moments of the linearized (Ornstein-Uhlenbeck) fluctuations.
struct PairCovariances {
  double xxp = 0;  // <dx dx+> = g^2 mu / (1 - mu)
  double yyp = 0;  // <dy dy+> = -g^2 mu / (1 + mu)
};

inline PairCovariances ou_covariances(const ModelParams& p) {
  require_below_threshold(p, "ou_covariances");
  const double g2 = p.g() * p.g(), mu = p.mu();
  return {g2 * mu / (1.0 - mu), -g2 * mu / (1.0 + mu)};
}

/// Leading-order moments obtained by evaluating the second-order pump response
/// to the Gaussian first-order fluctuations in closed form (Isserlis pairings of
/// the exponentially correlated x, y processes). Independent of the formulas above.
struct GaussianClosure {
  double t1 = 0, t2 = 0, t3 = 0, t4 = 0;
  double vx0 = 0, vy0 = 0;
  double q4 = 0;
  double x0_shift = 0;  // <x0> - 2 mu

  double s() const { return -t1 + t2 + t3 + t4; }
  CsSides cs_sides() const {
    CsSides cs;
    cs.lhs = q4 * (vx0 + vy0);
    cs.rhs = s() * s();
    if (cs.lhs > 0.0) cs.ratio = cs.rhs / cs.lhs;
    return cs;
  }
};

inline GaussianClosure gaussian_closure(const ModelParams& p) {
  require_below_threshold(p, "gaussian_closure");
  const double mu = p.mu(), gr = p.gamma_r();
  const PairCovariances c = ou_covariances(p);
  // Pump kernel gr e^{-gr s} against a product of two correlations decaying at rate k.
  auto filt = [gr](double k) { return gr / (gr + k); };
  const double kx = 2.0 * (1.0 - mu), ky = 2.0 * (1.0 + mu), kxy = 2.0;
  GaussianClosure r;
  r.t1 = -c.xxp * c.xxp * filt(kx);
  r.t2 = c.yyp * c.yyp * filt(ky);
  r.t3 = -c.xxp * c.yyp * filt(kxy);
  r.t4 = r.t3;
  r.vx0 = c.xxp * c.xxp * filt(kx) + c.yyp * c.yyp * filt(ky);
  r.vy0 = 2.0 * c.xxp * c.yyp * filt(kxy);
  r.q4 = 2.0 * (c.xxp * c.xxp + c.yyp * c.yyp);
  r.x0_shift = -(c.xxp - c.yyp);
  return r;
}

}  // namespace opo::analytic
