#pragma once

// Trajectory-parallel ensembles.
//
// Trajectories are grouped into fixed blocks; each block is simulated by one
// worker into a private accumulator and blocks are merged in index order. The
// result is therefore bit-identical for any worker count.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "opo/moments.hpp"
#include "opo/sde.hpp"

namespace opo {

/// Environment variable selecting the worker count; unset or 0 means auto-detect.
inline constexpr const char* kWorkersEnv = "OPO_WORKERS";

inline unsigned resolve_workers(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct EnsembleOptions {
  std::size_t n_batches = 64;
  std::size_t n_time_bins = 50;
  unsigned workers = 0;                   // 0: environment or hardware concurrency
  double max_diverged_fraction = 0.01;    // above this the run is unreliable
  std::int64_t trajectories_per_block = 8;
};

struct EnsembleResult {
  MomentAccumulator moments;
  // Samples with per-trajectory index in [bin_begin[k], bin_begin[k+1]) of every
  // surviving trajectory; cumulative merges give running averages versus tau.
  std::vector<RawMoments> time_bins;
  std::vector<std::int64_t> bin_begin;
  std::vector<double> bin_end_tau;
  std::int64_t n_trajectories = 0;
  std::int64_t diverged = 0;
  std::int64_t discarded_steps = 0;
  bool unreliable = false;
  double wall_seconds = 0.0;
  unsigned workers = 1;

  double diverged_fraction() const {
    return n_trajectories ? static_cast<double>(diverged) / static_cast<double>(n_trajectories) : 0.0;
  }
};

namespace detail {

struct BlockResult {
  MomentAccumulator moments;
  std::vector<RawMoments> time_bins;
  std::int64_t diverged = 0;
  std::int64_t discarded_steps = 0;
};

inline std::int64_t batch_size_for(const SimConfig& c, std::size_t n_batches) {
  const std::int64_t total = c.total_samples();
  const auto nb = static_cast<std::int64_t>(std::max<std::size_t>(1, n_batches));
  return std::max<std::int64_t>(1, (total + nb - 1) / nb);
}

}  // namespace detail

/// Runs `config.n_trajectories` trajectories on independent substreams and merges
/// their statistics. Diverged trajectories are counted and excluded.
inline EnsembleResult run_ensemble(const ModelParams& p, const SimConfig& c, const EnsembleOptions& opt = {}) {
  validate(c, p);
  const auto t_start = std::chrono::steady_clock::now();
  const std::int64_t batch = detail::batch_size_for(c, opt.n_batches);
  const std::int64_t n_spt = c.n_samples_per_traj;
  const auto n_bins = static_cast<std::int64_t>(std::clamp<std::size_t>(opt.n_time_bins, 1, static_cast<std::size_t>(n_spt)));
  std::vector<std::int64_t> bin_begin(static_cast<std::size_t>(n_bins + 1));
  for (std::int64_t k = 0; k <= n_bins; ++k) bin_begin[k] = k * n_spt / n_bins;
  std::vector<std::int64_t> bin_of(static_cast<std::size_t>(n_spt));
  for (std::int64_t k = 0; k < n_bins; ++k)
    for (std::int64_t j = bin_begin[k]; j < bin_begin[k + 1]; ++j) bin_of[j] = k;

  auto run_block = [&](std::int64_t first, std::int64_t last) {
    detail::BlockResult br{MomentAccumulator(p, batch), std::vector<RawMoments>(n_bins), 0, 0};
    const auto center = br.moments.center();
    for (std::int64_t tr = first; tr < last; ++tr) {
      TrajectoryResult r = simulate_trajectory(p, c, tr);
      if (r.diverged) {
        ++br.diverged;
        br.discarded_steps += r.discarded_steps;
        continue;
      }
      for (std::int64_t j = 0; j < n_spt; ++j) {
        const QuadratureSample& s = r.samples[static_cast<std::size_t>(j)];
        br.moments.accumulate_at(s, tr * n_spt + j);
        auto u = s.channels();
        for (int i = 0; i < kNumChannels; ++i) u[i] -= center[i];
        br.time_bins[bin_of[j]].add(u);
      }
    }
    return br;
  };

  EnsembleResult out{MomentAccumulator(p, batch), std::vector<RawMoments>(n_bins), bin_begin, {}, c.n_trajectories};
  out.workers = resolve_workers(opt.workers);
  const std::int64_t per_block = std::max<std::int64_t>(1, opt.trajectories_per_block);
  const std::int64_t n_blocks = (c.n_trajectories + per_block - 1) / per_block;
  std::vector<detail::BlockResult> wave;
  for (std::int64_t b0 = 0; b0 < n_blocks; b0 += out.workers) {
    const std::int64_t b1 = std::min<std::int64_t>(n_blocks, b0 + out.workers);
    wave.assign(static_cast<std::size_t>(b1 - b0), detail::BlockResult{MomentAccumulator(p, batch), {}, 0, 0});
    {
      std::vector<std::jthread> pool;
      for (std::int64_t b = b0; b < b1; ++b) {
        pool.emplace_back([&, b] {
          const std::int64_t first = b * per_block;
          const std::int64_t last = std::min(c.n_trajectories, first + per_block);
          wave[static_cast<std::size_t>(b - b0)] = run_block(first, last);
        });
      }
    }
    for (auto& br : wave) {
      out.moments.merge(br.moments);
      for (std::int64_t k = 0; k < n_bins; ++k) out.time_bins[k].merge(br.time_bins[k]);
      out.diverged += br.diverged;
      out.discarded_steps += br.discarded_steps;
    }
  }

  const double step_tau = c.dt;
  for (std::int64_t k = 0; k < n_bins; ++k) {
    const std::int64_t last_sample = bin_begin[k + 1] - 1;
    out.bin_end_tau.push_back(static_cast<double>(c.burn_in_steps() + last_sample * c.steps_per_sample()) * step_tau);
  }
  out.unreliable = out.diverged_fraction() > opt.max_diverged_fraction;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace opo
