#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, counter), so trajectories can be generated in any order and
// on any number of workers with identical results.

#include <array>
#include <cmath>
#include <cstdint>

namespace opo {

/// Philox4x32-10 (Salmon et al., SC'11).
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) : key_(key) {}

  constexpr Counter operator()(Counter ctr) const {
    Key k = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, k);
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return ctr;
  }

private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  Key key_;
};

/// SplitMix64 finalizer; used to turn user seeds into well-mixed keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

namespace detail {

/// 128-layer ziggurat for the standard normal (Marsaglia & Tsang; Doornik's layout).
class Ziggurat {
public:
  static constexpr int kLayers = 128;
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;

  static const Ziggurat& get() {
    static const Ziggurat z;
    return z;
  }

  double x(int i) const { return x_[i]; }
  double ratio(int i) const { return ratio_[i]; }

private:
  Ziggurat() {
    const double f = std::exp(-0.5 * kR * kR);
    x_[0] = kV / f;
    x_[1] = kR;
    x_[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) x_[i] = std::sqrt(-2.0 * std::log(kV / x_[i - 1] + std::exp(-0.5 * x_[i - 1] * x_[i - 1])));
    for (int i = 0; i < kLayers; ++i) ratio_[i] = x_[i + 1] / x_[i];
  }

  std::array<double, kLayers + 1> x_{};
  std::array<double, kLayers> ratio_{};
};

}  // namespace detail

/// Standard normal variates addressed by (seed, stream, step).
///
/// Each step yields four independent N(0,1) values. The first two Philox blocks
/// of a step supply one 64-bit word per value; the rare ziggurat rejections draw
/// further blocks of the same step from higher lanes.
class NormalStream {
public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) : philox_(make_key(seed)), stream_(stream) {}

  std::uint64_t stream() const { return stream_; }

  std::array<double, 4> normals4(std::uint64_t step) const {
    const auto b0 = block(step, 0);
    const auto b1 = block(step, 1);
    Spill spill{this, step};
    return {normal(word(b0[0], b0[1]), spill), normal(word(b0[2], b0[3]), spill),
            normal(word(b1[0], b1[1]), spill), normal(word(b1[2], b1[3]), spill)};
  }

  /// Uniform on [0, 1) with 53 random bits.
  static double unit(std::uint64_t w) { return static_cast<double>(w >> 11) * 0x1.0p-53; }

private:
  // Extra words for rejected ziggurat draws, from lanes 2, 3, ...
  struct Spill {
    const NormalStream* owner;
    std::uint64_t step;
    std::uint32_t lane = 2;
    int used = 4;
    Philox4x32::Counter buf{};

    std::uint64_t next() {
      if (used >= 4) {
        buf = owner->block(step, lane++);
        used = 0;
      }
      const std::uint64_t w = word(buf[used], buf[used + 1]);
      used += 2;
      return w;
    }
  };

  static std::uint64_t word(std::uint32_t lo, std::uint32_t hi) { return (std::uint64_t{hi} << 32) | lo; }

  static Philox4x32::Key make_key(std::uint64_t seed) {
    const std::uint64_t k = splitmix64(seed);
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  Philox4x32::Counter block(std::uint64_t step, std::uint32_t lane) const {
    // High 8 bits of the second counter word carry the lane; streams use 56 bits.
    const std::uint64_t hi = (stream_ & 0x00FFFFFFFFFFFFFFull) | (std::uint64_t{lane & 0xFFu} << 56);
    return philox_({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                    static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)});
  }

  static double normal(std::uint64_t w, Spill& spill) {
    const auto& z = detail::Ziggurat::get();
    for (;;) {
      const int i = static_cast<int>(w & (detail::Ziggurat::kLayers - 1));
      const double u = 2.0 * unit(w) - 1.0;
      if (std::abs(u) < z.ratio(i)) return u * z.x(i);
      if (i == 0) return tail(u < 0.0, spill);
      const double x = u * z.x(i);
      const double f0 = std::exp(-0.5 * (z.x(i) * z.x(i) - x * x));
      const double f1 = std::exp(-0.5 * (z.x(i + 1) * z.x(i + 1) - x * x));
      if (f1 + unit(spill.next()) * (f0 - f1) < 1.0) return x;
      w = spill.next();
    }
  }

  static double tail(bool negative, Spill& spill) {
    constexpr double r = detail::Ziggurat::kR;
    double x, y;
    do {
      x = std::log1p(-unit(spill.next())) / r;
      y = std::log1p(-unit(spill.next()));
    } while (-2.0 * y < x * x);
    return negative ? x - r : r - x;
  }

  Philox4x32 philox_;
  std::uint64_t stream_;
};

}  // namespace opo
