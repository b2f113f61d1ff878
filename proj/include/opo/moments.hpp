#pragma once

// Streaming, mergeable estimation of centered moments up to order four.
//
// Samples are shifted by a provisional center (the zeroth-order steady state)
// and every monomial of degree <= 4 in the six complex quadrature channels is
// summed with compensated arithmetic. Any central or raw moment of products of
// linear forms (quadratures or amplitudes) follows exactly from those sums, so
// merging is plain addition and the estimate from merged accumulators equals
// the estimate from the concatenated stream.
//
// Standard errors come from contiguous sample batches: each moment is
// re-estimated with one batch left out and the spread of those replicas gives
// the error (for a plain mean this is exactly the batch-means formula).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opo/model.hpp"

namespace opo {

inline constexpr int kMaxOrder = 4;

namespace detail {

/// Enumerates sorted channel tuples of degree 1..4 in accumulation order.
class MonomialTable {
public:
  static const MonomialTable& get() {
    static const MonomialTable table;
    return table;
  }

  int size() const { return count_; }

  /// Index of the sorted tuple `idx`; empty tuple is not stored.
  int index(std::span<const int> idx) const {
    int code = 0;
    for (int c : idx) code = code * kNumChannels + c;
    return lookup_[idx.size()][code];
  }

private:
  MonomialTable() {
    for (auto& v : lookup_) v.fill(-1);
    int n = 0;
    for (int i = 0; i < kNumChannels; ++i) lookup_[1][i] = n++;
    for (int i = 0; i < kNumChannels; ++i)
      for (int j = i; j < kNumChannels; ++j) lookup_[2][i * 6 + j] = n++;
    for (int i = 0; i < kNumChannels; ++i)
      for (int j = i; j < kNumChannels; ++j)
        for (int k = j; k < kNumChannels; ++k) lookup_[3][(i * 6 + j) * 6 + k] = n++;
    for (int i = 0; i < kNumChannels; ++i)
      for (int j = i; j < kNumChannels; ++j)
        for (int k = j; k < kNumChannels; ++k)
          for (int l = k; l < kNumChannels; ++l) lookup_[4][((i * 6 + j) * 6 + k) * 6 + l] = n++;
    count_ = n;
  }

  std::array<std::array<int, 1296>, kMaxOrder + 1> lookup_{};
  int count_ = 0;
};

}  // namespace detail

inline constexpr int kNumMonomials = 209;  // 6 + 21 + 56 + 126

/// Kahan-compensated complex sum.
class CompensatedSum {
public:
  void add(cplx x) {
    add_part(re_, re_c_, x.real());
    add_part(im_, im_c_, x.imag());
  }
  cplx value() const { return {re_ - re_c_, im_ - im_c_}; }
  cplx compensation() const { return {re_c_, im_c_}; }
  cplx raw_sum() const { return {re_, im_}; }

  static CompensatedSum exact(cplx v) {
    CompensatedSum s;
    s.re_ = v.real();
    s.im_ = v.imag();
    return s;
  }

private:
  static void add_part(double& s, double& c, double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double re_ = 0.0, re_c_ = 0.0, im_ = 0.0, im_c_ = 0.0;
};

/// Count plus compensated sums of every shifted monomial of degree 1..4.
class RawMoments {
public:
  std::int64_t count() const { return count_; }

  /// `u` is the sample already shifted by the provisional center.
  void add(const std::array<cplx, kNumChannels>& u) {
    int n = 0;
    for (int i = 0; i < kNumChannels; ++i) sums_[n++].add(u[i]);
    for (int i = 0; i < kNumChannels; ++i)
      for (int j = i; j < kNumChannels; ++j) sums_[n++].add(u[i] * u[j]);
    for (int i = 0; i < kNumChannels; ++i)
      for (int j = i; j < kNumChannels; ++j) {
        const cplx uij = u[i] * u[j];
        for (int k = j; k < kNumChannels; ++k) sums_[n++].add(uij * u[k]);
      }
    for (int i = 0; i < kNumChannels; ++i)
      for (int j = i; j < kNumChannels; ++j) {
        const cplx uij = u[i] * u[j];
        for (int k = j; k < kNumChannels; ++k) {
          const cplx uijk = uij * u[k];
          for (int l = k; l < kNumChannels; ++l) sums_[n++].add(uijk * u[l]);
        }
      }
    ++count_;
  }

  void merge(const RawMoments& o) {
    for (int n = 0; n < kNumMonomials; ++n) {
      sums_[n].add(o.sums_[n].raw_sum());
      sums_[n].add(-o.sums_[n].compensation());
    }
    count_ += o.count_;
  }

  /// Sum of the monomial with sorted channel tuple `idx` (degree >= 1).
  cplx sum(std::span<const int> idx) const {
    return sums_[detail::MonomialTable::get().index(idx)].value();
  }
  cplx sum_at(int n) const { return sums_[n].value(); }

  /// this - o, used for leave-one-batch-out replicas.
  RawMoments minus(const RawMoments& o) const {
    RawMoments r;
    for (int n = 0; n < kNumMonomials; ++n) {
      r.sums_[n] = CompensatedSum::exact(sums_[n].value() - o.sums_[n].value());
    }
    r.count_ = count_ - o.count_;
    return r;
  }

private:
  std::array<CompensatedSum, kNumMonomials> sums_{};
  std::int64_t count_ = 0;
};

/// Coefficients of a linear combination of the six quadrature channels.
using LinearForm = std::array<cplx, kNumChannels>;

inline LinearForm channel_form(Channel c) {
  LinearForm f{};
  f[c] = 1.0;
  return f;
}

/// Amplitudes as linear forms in the quadratures (inverse of alpha_to_quadratures).
struct AmplitudeForms {
  LinearForm a0{}, a0p{}, a1{}, a1p{}, a2{}, a2p{};

  explicit AmplitudeForms(const ModelParams& p) {
    const double hg = 0.5 / p.g();
    const double hp = 0.5 / p.pump_quadrature_scale();
    a0[kX0] = hp;
    a0[kY0] = kI * hp;
    a0p[kX0] = hp;
    a0p[kY0] = -kI * hp;
    a1[kX] = hg;
    a1[kY] = kI * hg;
    a2p[kX] = hg;
    a2p[kY] = -kI * hg;
    a2[kXp] = hg;
    a2[kYp] = kI * hg;
    a1p[kXp] = hg;
    a1p[kYp] = -kI * hg;
  }
};

/// Moments of a RawMoments block about an arbitrary origin.
class MomentView {
public:
  /// `center` is the provisional shift the sums were taken about.
  MomentView(const RawMoments& raw, const std::array<cplx, kNumChannels>& center) : raw_(raw), center_(center) {
    if (raw.count() <= 0) throw std::runtime_error("no samples");
    inv_n_ = 1.0 / static_cast<double>(raw.count());
    for (int i = 0; i < kNumChannels; ++i) {
      const int idx[1] = {i};
      shift_mean_[i] = raw.sum(idx) * inv_n_;
    }
  }

  /// Sample mean of channel i.
  cplx mean(int i) const { return center_[i] + shift_mean_[i]; }

  /// <prod_k (v_{c_k} - o_{c_k})> where o is the sample mean (central) or zero (raw).
  cplx moment(std::span<const int> channels, bool central) const {
    std::array<cplx, kMaxOrder> delta{};
    const int k = static_cast<int>(channels.size());
    for (int p = 0; p < k; ++p) {
      const int c = channels[p];
      delta[p] = central ? shift_mean_[c] : -center_[c];
    }
    // Expand prod (u - delta) over subsets of positions.
    cplx total{};
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      std::array<int, kMaxOrder> kept{};
      int nk = 0;
      cplx factor = 1.0;
      for (int p = 0; p < k; ++p) {
        if (mask & (1u << p))
          kept[nk++] = channels[p];
        else
          factor *= -delta[p];
      }
      if (factor == cplx{} && nk < k) continue;
      if (nk == 0) {
        total += factor;
        continue;
      }
      std::sort(kept.begin(), kept.begin() + nk);
      total += factor * raw_.sum(std::span<const int>(kept.data(), nk)) * inv_n_;
    }
    return total;
  }

  /// <prod_k L_k . (v - o)> for linear forms L_k.
  cplx form_moment(std::span<const LinearForm> forms, bool central) const {
    const int k = static_cast<int>(forms.size());
    std::array<int, kMaxOrder> pick{};
    cplx total{};
    // Odometer over channel choices, skipping zero coefficients.
    auto recurse = [&](auto&& self, int pos, cplx coeff) -> void {
      if (pos == k) {
        total += coeff * moment(std::span<const int>(pick.data(), k), central);
        return;
      }
      for (int c = 0; c < kNumChannels; ++c) {
        const cplx a = forms[pos][c];
        if (a == cplx{}) continue;
        pick[pos] = c;
        self(self, pos + 1, coeff * a);
      }
    };
    recurse(recurse, 0, 1.0);
    return total;
  }

private:
  const RawMoments& raw_;
  std::array<cplx, kNumChannels> center_;
  std::array<cplx, kNumChannels> shift_mean_{};
  double inv_n_ = 0.0;
};

/// Names of the reported moments.
namespace mom {
inline constexpr const char* kMeanX0 = "mean_x0";
inline constexpr const char* kMeanY0 = "mean_y0";
inline constexpr const char* kMeanX = "mean_x";
inline constexpr const char* kMeanY = "mean_y";
inline constexpr const char* kMeanXp = "mean_xp";
inline constexpr const char* kMeanYp = "mean_yp";
inline constexpr const char* kXXp = "xxp";    // <dx dx+>
inline constexpr const char* kYYp = "yyp";    // <dy dy+>
inline constexpr const char* kVarX0 = "vx0";  // <dx0^2>
inline constexpr const char* kVarY0 = "vy0";  // <dy0^2>
inline constexpr const char* kX0X = "x0x";
inline constexpr const char* kX0Y = "x0y";
inline constexpr const char* kY0X = "y0x";
inline constexpr const char* kY0Y = "y0y";
inline constexpr const char* kT1 = "t1";  // <dx dx+ dx0>
inline constexpr const char* kT2 = "t2";  // <dy dy+ dx0>
inline constexpr const char* kT3 = "t3";  // <dy dx+ dy0>
inline constexpr const char* kT4 = "t4";  // <dx dy+ dy0>
inline constexpr const char* kS = "s";    // -t1 + t2 + t3 + t4
inline constexpr const char* kQ4 = "q4";  // <(dx^2+dy^2)(dx+^2+dy+^2)>
inline constexpr const char* kX0Cubed = "x0_3";
// Centered amplitude moments.
inline constexpr const char* kN12 = "n12";    // <da1+ da1 da2+ da2>
inline constexpr const char* kN0 = "n0";      // <da0+ da0>
inline constexpr const char* kN1 = "n1";      // <da1+ da1>
inline constexpr const char* kN2 = "n2";      // <da2+ da2>
inline constexpr const char* kN01 = "n01";    // <da0+ da0 da1+ da1>
inline constexpr const char* kN02 = "n02";    // <da0+ da0 da2+ da2>
inline constexpr const char* kA120 = "a120";  // <da1 da2 da0>
inline constexpr const char* kA120Conj = "a120p";  // <da1+ da2+ da0+>
inline constexpr const char* kRawPrefix = "raw_";  // uncentered variants of the amplitude set
}  // namespace mom

/// One estimate with its batch replicas.
struct Estimate {
  cplx value{};
  double std_error = 0.0;       // of the real part
  double std_error_imag = 0.0;  // of the imaginary part
  std::size_t n_batches = 0;
  bool low_confidence = false;
  std::vector<cplx> replicas;  // leave-one-batch-out values

  /// Builds an estimate with a prescribed real-part error, for injected data.
  static Estimate synthetic(cplx value, double sigma, std::size_t n_batches = 32) {
    Estimate e;
    e.value = value;
    e.n_batches = n_batches;
    const double d = sigma / std::sqrt(static_cast<double>(n_batches) - 1.0);
    for (std::size_t b = 0; b < n_batches; ++b) e.replicas.push_back(value + (b % 2 ? d : -d));
    e.refresh_errors();
    return e;
  }

  /// Recomputes std_error from replicas.
  void refresh_errors() {
    const std::size_t b = replicas.size();
    n_batches = b;
    if (b < 2) {
      std_error = std_error_imag = 0.0;
      return;
    }
    cplx mean{};
    for (const cplx& r : replicas) mean += r;
    mean /= static_cast<double>(b);
    double sr = 0, si = 0;
    for (const cplx& r : replicas) {
      sr += (r.real() - mean.real()) * (r.real() - mean.real());
      si += (r.imag() - mean.imag()) * (r.imag() - mean.imag());
    }
    const double f = static_cast<double>(b - 1) / static_cast<double>(b);
    std_error = std::sqrt(f * sr);
    std_error_imag = std::sqrt(f * si);
  }

  /// Number of standard errors separating Re(value) from zero.
  double significance() const {
    if (std_error > 0.0) return std::abs(value.real()) / std_error;
    return value.real() == 0.0 ? 0.0 : INFINITY;
  }
};

/// Applies `f` to the values and to every replica pair-wise.
template <class F>
Estimate combine(const Estimate& a, const Estimate& b, F f) {
  if (a.replicas.size() != b.replicas.size())
    throw std::invalid_argument("combine: estimates have different batch structure");
  Estimate r;
  r.value = f(a.value, b.value);
  r.replicas.reserve(a.replicas.size());
  for (std::size_t i = 0; i < a.replicas.size(); ++i) r.replicas.push_back(f(a.replicas[i], b.replicas[i]));
  r.refresh_errors();
  r.low_confidence = a.low_confidence || b.low_confidence;
  return r;
}

inline constexpr std::size_t kMinConfidentBatches = 30;

struct MomentReport {
  ModelParams params;
  std::int64_t n_samples = 0;
  std::size_t n_batches = 0;
  bool low_confidence = false;
  std::map<std::string, Estimate> values;

  bool has(const std::string& name) const { return values.count(name) != 0; }
  const Estimate& at(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw std::out_of_range("moment '" + name + "' missing from report");
    return it->second;
  }
};

/// Computes every reported moment from one block of sums.
inline std::map<std::string, cplx> evaluate_moments(const RawMoments& raw, const std::array<cplx, kNumChannels>& center,
                                                    const ModelParams& p) {
  const MomentView v(raw, center);
  std::map<std::string, cplx> out;
  auto c = [&](std::initializer_list<int> ch) { return v.moment(std::span<const int>(ch.begin(), ch.size()), true); };

  out[mom::kMeanX0] = v.mean(kX0);
  out[mom::kMeanY0] = v.mean(kY0);
  out[mom::kMeanX] = v.mean(kX);
  out[mom::kMeanY] = v.mean(kY);
  out[mom::kMeanXp] = v.mean(kXp);
  out[mom::kMeanYp] = v.mean(kYp);

  out[mom::kXXp] = c({kX, kXp});
  out[mom::kYYp] = c({kY, kYp});
  out[mom::kVarX0] = c({kX0, kX0});
  out[mom::kVarY0] = c({kY0, kY0});
  out[mom::kX0X] = c({kX0, kX});
  out[mom::kX0Y] = c({kX0, kY});
  out[mom::kY0X] = c({kY0, kX});
  out[mom::kY0Y] = c({kY0, kY});

  const cplx t1 = c({kX0, kX, kXp});
  const cplx t2 = c({kX0, kY, kYp});
  const cplx t3 = c({kY0, kY, kXp});
  const cplx t4 = c({kY0, kX, kYp});
  out[mom::kT1] = t1;
  out[mom::kT2] = t2;
  out[mom::kT3] = t3;
  out[mom::kT4] = t4;
  out[mom::kS] = -t1 + t2 + t3 + t4;
  out[mom::kQ4] = c({kX, kX, kXp, kXp}) + c({kX, kX, kYp, kYp}) + c({kY, kY, kXp, kXp}) + c({kY, kY, kYp, kYp});
  out[mom::kX0Cubed] = c({kX0, kX0, kX0});

  const AmplitudeForms a(p);
  for (bool central : {true, false}) {
    const std::string pre = central ? "" : mom::kRawPrefix;
    auto f = [&](std::initializer_list<LinearForm> forms) {
      return v.form_moment(std::span<const LinearForm>(forms.begin(), forms.size()), central);
    };
    out[pre + mom::kN12] = f({a.a1p, a.a1, a.a2p, a.a2});
    out[pre + mom::kN0] = f({a.a0p, a.a0});
    out[pre + mom::kN1] = f({a.a1p, a.a1});
    out[pre + mom::kN2] = f({a.a2p, a.a2});
    out[pre + mom::kN01] = f({a.a0p, a.a0, a.a1p, a.a1});
    out[pre + mom::kN02] = f({a.a0p, a.a0, a.a2p, a.a2});
    out[pre + mom::kA120] = f({a.a1, a.a2, a.a0});
    out[pre + mom::kA120Conj] = f({a.a1p, a.a2p, a.a0p});
  }
  return out;
}

/// Batched accumulator. Sample number n (0-based) lands in batch n / batch_size.
class MomentAccumulator {
public:
  MomentAccumulator(const ModelParams& p, std::int64_t batch_size) : params_(p), batch_size_(batch_size) {
    if (batch_size < 1) throw std::invalid_argument("MomentAccumulator: batch_size must be >= 1");
    center_.fill(cplx{});
    center_[kX0] = 2.0 * p.mu();
  }

  const ModelParams& params() const { return params_; }
  std::int64_t batch_size() const { return batch_size_; }
  const std::array<cplx, kNumChannels>& center() const { return center_; }
  std::size_t n_batches() const {
    return static_cast<std::size_t>(std::count_if(batches_.begin(), batches_.end(),
                                                  [](const RawMoments& r) { return r.count() > 0; }));
  }
  std::int64_t count() const {
    std::int64_t n = 0;
    for (const auto& b : batches_) n += b.count();
    return n;
  }

  /// Appends at the next stream position.
  void accumulate(const QuadratureSample& s) { accumulate_at(s, next_++); }

  /// Adds a sample at an explicit stream position (used by the ensemble so that
  /// batch membership does not depend on scheduling).
  void accumulate_at(const QuadratureSample& s, std::int64_t position) {
    const auto b = static_cast<std::size_t>(position / batch_size_);
    if (batches_.size() <= b) batches_.resize(b + 1);
    auto ch = s.channels();
    for (int i = 0; i < kNumChannels; ++i) ch[i] -= center_[i];
    batches_[b].add(ch);
    next_ = std::max(next_, position + 1);
  }

  /// Batch-wise sum. Throws std::invalid_argument if parameters or batch size differ.
  void merge(const MomentAccumulator& o) {
    if (!(o.params_ == params_) || o.batch_size_ != batch_size_)
      throw std::invalid_argument("MomentAccumulator::merge: schema mismatch");
    if (batches_.size() < o.batches_.size()) batches_.resize(o.batches_.size());
    for (std::size_t b = 0; b < o.batches_.size(); ++b) batches_[b].merge(o.batches_[b]);
    next_ = std::max(next_, o.next_);
  }

  RawMoments total() const {
    RawMoments t;
    for (const auto& b : batches_) t.merge(b);
    return t;
  }

  const std::vector<RawMoments>& batches() const { return batches_; }

private:
  ModelParams params_;
  std::int64_t batch_size_;
  std::array<cplx, kNumChannels> center_{};
  std::vector<RawMoments> batches_;
  std::int64_t next_ = 0;
};

inline MomentAccumulator merge(MomentAccumulator a, const MomentAccumulator& b) {
  a.merge(b);
  return a;
}

/// Estimates plus leave-one-batch-out errors. Needs >= 2 non-empty batches.
inline MomentReport finalize(const MomentAccumulator& acc) {
  const RawMoments total = acc.total();
  if (total.count() == 0) throw std::runtime_error("no samples");
  std::vector<const RawMoments*> live;
  for (const auto& b : acc.batches())
    if (b.count() > 0) live.push_back(&b);
  if (live.size() < 2) throw std::runtime_error("insufficient samples: need at least 2 batches");

  MomentReport rep;
  rep.params = acc.params();
  rep.n_samples = total.count();
  rep.n_batches = live.size();
  rep.low_confidence = live.size() < kMinConfidentBatches;

  const auto full = evaluate_moments(total, acc.center(), acc.params());
  for (const auto& [name, value] : full) {
    Estimate& e = rep.values[name];
    e.value = value;
    e.replicas.reserve(live.size());
  }
  for (const RawMoments* b : live) {
    const RawMoments rest = total.minus(*b);
    const auto rep_b = evaluate_moments(rest, acc.center(), acc.params());
    for (const auto& [name, value] : rep_b) rep.values[name].replicas.push_back(value);
  }
  for (auto& [name, e] : rep.values) {
    e.refresh_errors();
    e.low_confidence = rep.low_confidence;
  }
  return rep;
}

}  // namespace opo
