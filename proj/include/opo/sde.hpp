#pragma once

// Positive-P trajectories of the full nonlinear Ito equations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "opo/model.hpp"
#include "opo/random.hpp"

namespace opo {

enum class Stepper { kEulerMaruyama, kExponentialEuler };

inline const char* to_string(Stepper s) {
  return s == Stepper::kEulerMaruyama ? "euler" : "exponential";
}

inline Stepper stepper_from_string(const std::string& name) {
  if (name == "euler") return Stepper::kEulerMaruyama;
  if (name == "exponential") return Stepper::kExponentialEuler;
  throw std::invalid_argument("unknown stepper '" + name + "' (expected euler|exponential)");
}

struct SimConfig {
  double dt = 0.01;
  double burn_in = 40.0;
  double sample_interval = 4.0;
  std::int64_t n_samples_per_traj = 100;
  std::int64_t n_trajectories = 256;
  std::uint64_t master_seed = 1;
  double divergence_threshold = 1e6;
  Stepper stepper = Stepper::kEulerMaruyama;

  /// Step and window defaults scaled to the slowest relaxation rate, min(1 - mu, gamma_r).
  static SimConfig defaults_for(const ModelParams& p) {
    SimConfig c;
    c.dt = default_dt(p);
    c.burn_in = default_burn_in(p);
    c.sample_interval = default_sample_interval(p);
    return c;
  }
  static double default_dt(const ModelParams& p) { return 0.01 / std::max(1.0, p.gamma_r()); }
  static double default_burn_in(const ModelParams& p) { return 20.0 / slowest_rate(p); }
  static double default_sample_interval(const ModelParams& p) { return 2.0 / (1.0 - p.mu()); }

  static double slowest_rate(const ModelParams& p) { return std::min(1.0 - p.mu(), p.gamma_r()); }

  std::int64_t burn_in_steps() const { return static_cast<std::int64_t>(std::ceil(burn_in / dt - 1e-9)); }
  std::int64_t steps_per_sample() const {
    return std::max<std::int64_t>(1, std::llround(sample_interval / dt));
  }
  std::int64_t total_samples() const { return n_samples_per_traj * n_trajectories; }
};

/// Throws std::invalid_argument naming the first violated constraint.
inline void validate(const SimConfig& c, const ModelParams& p) {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (!p.below_threshold()) fail("above threshold unsupported (mu must be < 1)");
  if (!(c.dt > 0.0)) fail("dt must be > 0");
  if (c.dt * std::max(1.0, p.gamma_r()) > 0.05 + 1e-12)
    fail("dt * max(1, gamma_r) must be <= 0.05");
  const double rate = SimConfig::slowest_rate(p);
  if (c.burn_in < 10.0 / rate - 1e-9) fail("burn_in must be >= 10 / min(1 - mu, gamma_r)");
  if (c.sample_interval < 1.0 / (1.0 - p.mu()) - 1e-9) fail("sample_interval must be >= 1 / (1 - mu)");
  if (c.n_samples_per_traj < 1) fail("n_samples_per_traj must be >= 1");
  if (c.n_trajectories < 1) fail("n_trajectories must be >= 1");
  if (!(c.divergence_threshold > 0.0)) fail("divergence_threshold must be > 0");
}

/// Complex Wiener increments for one step.
struct NoiseIncrement {
  cplx dW1{}, dW2{}, dW1p{}, dW2p{};
};

/// <dW1 dW2> = <dW1p dW2p> = dt, every other second moment zero. Built from four
/// independent real Gaussians w of variance dt:
/// dW1,2 = (w_a +- i w_b)/sqrt2, dW1p,2p = (w_c +- i w_d)/sqrt2.
inline NoiseIncrement sample_wiener_increments(const NormalStream& rng, std::uint64_t step, double dt) {
  const auto z = rng.normals4(step);
  const double s = std::sqrt(0.5 * dt);
  const double wa = s * z[0], wb = s * z[1], wc = s * z[2], wd = s * z[3];
  return {cplx(wa, wb), cplx(wa, -wb), cplx(wc, wd), cplx(wc, -wd)};
}

inline PhaseSpaceState step_euler_maruyama(const PhaseSpaceState& s, const ModelParams& p, double dt,
                                           const NoiseIncrement& dw) {
  const DriftDiffusion dd = drift_and_diffusion(s, p);
  const PhaseSpaceState& f = dd.drift;
  PhaseSpaceState n;
  n.a0 = s.a0 + f.a0 * dt;
  n.a0p = s.a0p + f.a0p * dt;
  n.a1 = s.a1 + f.a1 * dt + dd.noise_amp[0] * dw.dW1;
  n.a2 = s.a2 + f.a2 * dt + dd.noise_amp[0] * dw.dW2;
  n.a1p = s.a1p + f.a1p * dt + dd.noise_amp[1] * dw.dW1p;
  n.a2p = s.a2p + f.a2p * dt + dd.noise_amp[1] * dw.dW2p;
  return n;
}

inline PhaseSpaceState step_euler_maruyama(const PhaseSpaceState& s, const ModelParams& p, double dt,
                                           const NormalStream& rng, std::uint64_t step) {
  return step_euler_maruyama(s, p, dt, sample_wiener_increments(rng, step, dt));
}

/// Euler-Maruyama with the pump's linear relaxation integrated exactly:
/// a0' = F + (a0 - F) e^{-gr dt} + N (1 - e^{-gr dt}) / gr, F = mu/eps, N = -eps a1 a2.
/// Signal and idler are stepped as in Euler-Maruyama.
inline PhaseSpaceState step_exponential_euler(const PhaseSpaceState& s, const ModelParams& p, double dt,
                                              const NoiseIncrement& dw) {
  const double gr = p.gamma_r();
  const double decay = std::exp(-gr * dt);
  const double phi = -std::expm1(-gr * dt) / gr;
  const double fp = p.pump_fixed_point();
  const PhaseSpaceState nl = nonlinear_drift(s, p);
  const cplx amp0 = std::sqrt(p.eps() * s.a0);
  const cplx amp0p = std::sqrt(p.eps() * s.a0p);
  PhaseSpaceState n;
  n.a0 = fp + (s.a0 - fp) * decay + nl.a0 * phi;
  n.a0p = fp + (s.a0p - fp) * decay + nl.a0p * phi;
  n.a1 = s.a1 + (nl.a1 - s.a1) * dt + amp0 * dw.dW1;
  n.a2 = s.a2 + (nl.a2 - s.a2) * dt + amp0 * dw.dW2;
  n.a1p = s.a1p + (nl.a1p - s.a1p) * dt + amp0p * dw.dW1p;
  n.a2p = s.a2p + (nl.a2p - s.a2p) * dt + amp0p * dw.dW2p;
  return n;
}

inline PhaseSpaceState step(Stepper kind, const PhaseSpaceState& s, const ModelParams& p, double dt,
                            const NoiseIncrement& dw) {
  return kind == Stepper::kEulerMaruyama ? step_euler_maruyama(s, p, dt, dw)
                                         : step_exponential_euler(s, p, dt, dw);
}

struct TrajectoryResult {
  std::vector<QuadratureSample> samples;
  bool diverged = false;
  std::int64_t discarded_steps = 0;  // steps not taken after a divergence
};

namespace detail {
inline bool escaped(const PhaseSpaceState& s, double bound_sq) {
  // Written so that NaN compares as escaped.
  for (const cplx& v : {s.a0, s.a1, s.a2, s.a0p, s.a1p, s.a2p})
    if (!(std::norm(v) <= bound_sq)) return true;
  return false;
}
}  // namespace detail

/// Stream id of a trajectory; distinct trajectories never share Philox counters.
inline NormalStream trajectory_stream(const SimConfig& c, std::int64_t trajectory_index) {
  return NormalStream(c.master_seed, static_cast<std::uint64_t>(trajectory_index));
}

/// Runs one trajectory from `initial`: burn-in, then n_samples_per_traj samples
/// spaced by sample_interval. The sample time is tau measured from the start.
inline TrajectoryResult simulate_trajectory(const ModelParams& p, const SimConfig& c,
                                            std::int64_t trajectory_index, const PhaseSpaceState& initial) {
  if (!p.below_threshold()) throw std::domain_error("above threshold unsupported (mu must be < 1)");
  const NormalStream rng = trajectory_stream(c, trajectory_index);
  const double bound_sq = c.divergence_threshold * c.divergence_threshold;
  const std::int64_t burn = c.burn_in_steps();
  const std::int64_t every = c.steps_per_sample();
  const std::int64_t total = burn + every * (c.n_samples_per_traj - 1);

  TrajectoryResult r;
  r.samples.reserve(static_cast<std::size_t>(c.n_samples_per_traj));
  PhaseSpaceState s = initial;
  if (detail::escaped(s, bound_sq)) {
    r.diverged = true;
    r.discarded_steps = total;
    return r;
  }
  std::uint64_t k = 0;
  auto advance_to = [&](std::int64_t target) {
    for (; static_cast<std::int64_t>(k) < target; ++k) {
      s = step(c.stepper, s, p, c.dt, sample_wiener_increments(rng, k, c.dt));
      if (detail::escaped(s, bound_sq)) {
        r.diverged = true;
        r.discarded_steps = total - static_cast<std::int64_t>(k) - 1;
        return false;
      }
    }
    return true;
  };
  for (std::int64_t j = 0; j < c.n_samples_per_traj; ++j) {
    if (!advance_to(burn + j * every)) return r;
    r.samples.push_back(alpha_to_quadratures(s, p, static_cast<double>(k) * c.dt));
  }
  return r;
}

/// Same, starting at the deterministic fixed point.
inline TrajectoryResult simulate_trajectory(const ModelParams& p, const SimConfig& c,
                                            std::int64_t trajectory_index) {
  return simulate_trajectory(p, c, trajectory_index, fixed_point(p));
}

}  // namespace opo
