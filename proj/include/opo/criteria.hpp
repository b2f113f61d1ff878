#pragma once

// Nonclassicality and entanglement verdicts computed from moment reports.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "opo/analytic.hpp"
#include "opo/moments.hpp"

namespace opo::criteria {

enum class Verdict { kViolated, kSatisfied, kInconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kViolated: return "violated";
    case Verdict::kSatisfied: return "satisfied";
    default: return "inconclusive";
  }
}

inline constexpr double kDefaultSigma = 3.0;

/// Which mode plays the single-mode role of the inequality
/// <n_a n_b> <n_c> >= |<a_a a_b a_c>|^2.
enum class Partition { kPump, kSignal, kIdler };

inline const char* to_string(Partition p) {
  switch (p) {
    case Partition::kPump: return "0|12";
    case Partition::kSignal: return "1|02";
    default: return "2|01";
  }
}

struct CriterionReport {
  std::string name;
  double lhs = 0, lhs_err = 0;
  double rhs = 0, rhs_err = 0;
  double ratio = 0, ratio_err = 0;
  double significance = 0;  // (rhs - lhs) / stderr(rhs - lhs)
  Verdict verdict = Verdict::kInconclusive;
  cplx lambda_opt{};
  bool no_signal = false;
  bool low_confidence = false;
  double sigma_threshold = kDefaultSigma;
  // Pump partition only: quadrature-normalized sides and the rhs rebuilt from
  // the quadrature triples s^2 (mapping identity).
  std::optional<double> lhs_quadrature, rhs_quadrature;
  std::optional<double> rhs_from_triples, rhs_from_triples_err;
};

struct CsOptions {
  double sigma_threshold = kDefaultSigma;
  bool centered = true;  // false: moments about zero instead of about the means
};

namespace detail {

inline const Estimate& need(const MomentReport& m, const std::string& name) {
  if (!m.has(name)) throw std::invalid_argument("missing moment channel '" + name + "'");
  return m.at(name);
}

template <class F>
Estimate map(const Estimate& a, F f) {
  Estimate r;
  r.value = f(a.value);
  for (const cplx& v : a.replicas) r.replicas.push_back(f(v));
  r.refresh_errors();
  r.low_confidence = a.low_confidence;
  return r;
}

inline Verdict decide(double diff, double diff_err, double k) {
  if (diff > k * diff_err) return Verdict::kViolated;
  if (-diff > k * diff_err) return Verdict::kSatisfied;
  return Verdict::kInconclusive;
}

}  // namespace detail

/// Generalized Cauchy-Schwarz test on the amplitude moments.
inline CriterionReport cs_test(const MomentReport& m, Partition part = Partition::kPump, const CsOptions& opt = {}) {
  const std::string pre = opt.centered ? "" : mom::kRawPrefix;
  const char* pair_name = nullptr;
  const char* single_name = nullptr;
  switch (part) {
    case Partition::kPump: pair_name = mom::kN12; single_name = mom::kN0; break;
    case Partition::kSignal: pair_name = mom::kN02; single_name = mom::kN1; break;
    case Partition::kIdler: pair_name = mom::kN01; single_name = mom::kN2; break;
  }
  const Estimate& pair = detail::need(m, pre + pair_name);
  const Estimate& single = detail::need(m, pre + single_name);
  const Estimate& triple = detail::need(m, pre + mom::kA120);
  const Estimate& triple_conj = detail::need(m, pre + mom::kA120Conj);

  const Estimate lhs = combine(pair, single, [](cplx a, cplx b) { return cplx(a.real() * b.real(), 0.0); });
  const Estimate rhs = detail::map(triple, [](cplx t) { return cplx(std::norm(t), 0.0); });
  const Estimate diff = combine(rhs, lhs, [](cplx r, cplx l) { return r - l; });

  CriterionReport rep;
  rep.name = std::string("cauchy_schwarz ") + to_string(part) + (opt.centered ? "" : " (uncentered)");
  rep.sigma_threshold = opt.sigma_threshold;
  rep.low_confidence = m.low_confidence;
  rep.lhs = lhs.value.real();
  rep.lhs_err = lhs.std_error;
  rep.rhs = rhs.value.real();
  rep.rhs_err = rhs.std_error;
  // The conjugate triple of the single mode over its occupation minimizes the
  // quadratic form in lambda.
  if (single.value.real() != 0.0) rep.lambda_opt = triple_conj.value / single.value.real();

  if (rep.lhs == 0.0 && rep.rhs == 0.0) {
    rep.no_signal = true;
    rep.verdict = Verdict::kInconclusive;
    return rep;
  }
  if (rep.lhs != 0.0) {
    const Estimate ratio = combine(rhs, lhs, [](cplx r, cplx l) { return r / l; });
    rep.ratio = ratio.value.real();
    rep.ratio_err = ratio.std_error;
  } else {
    rep.ratio = INFINITY;
  }
  const double d = diff.value.real();
  const double de = diff.std_error;
  rep.significance = de > 0.0 ? d / de : (d == 0.0 ? 0.0 : std::copysign(INFINITY, d));
  rep.verdict = detail::decide(d, de, opt.sigma_threshold);

  if (part == Partition::kPump && opt.centered) {
    const double scale = analytic::amplitude_cs_scale(m.params);
    rep.lhs_quadrature = rep.lhs / scale;
    rep.rhs_quadrature = rep.rhs / scale;
    if (m.has(mom::kS)) {
      const Estimate s2 = detail::map(m.at(mom::kS), [scale](cplx s) { return cplx(s.real() * s.real() * scale, 0.0); });
      rep.rhs_from_triples = s2.value.real();
      rep.rhs_from_triples_err = s2.std_error;
    }
  }
  return rep;
}

/// Cauchy-Schwarz verdict from closed-form sides (no statistical error).
inline CriterionReport cs_test_analytic(const analytic::CsSides& cs, const std::string& name = "cauchy_schwarz analytic") {
  CriterionReport rep;
  rep.name = name;
  rep.lhs = cs.lhs;
  rep.rhs = cs.rhs;
  if (!cs.ratio) {
    rep.no_signal = true;
    return rep;
  }
  rep.ratio = *cs.ratio;
  const double d = cs.rhs - cs.lhs;
  rep.significance = d == 0.0 ? 0.0 : std::copysign(INFINITY, d);
  rep.verdict = detail::decide(d, 0.0, rep.sigma_threshold);
  return rep;
}

/// A measured value with an optional standard error.
struct Measured {
  double value = 0;
  std::optional<double> std_error;
};

inline Measured measured(const Estimate& e) { return {e.value.real(), e.std_error}; }

struct WitnessResult {
  bool excluded = false;  // every bipartite-separable form ruled out
  std::array<double, 4> significance{};
  std::string message;
};

/// All four triple correlations nonzero at k sigma rules out every state of the
/// form sum p rho_k (x) rho_lm. Sufficient only.
inline WitnessResult separability_witness(const std::array<Measured, 4>& triples, double k = kDefaultSigma) {
  WitnessResult r;
  bool all = true;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (!triples[i].std_error || !(*triples[i].std_error >= 0.0))
      throw std::invalid_argument("separability_witness: triple correlation t" + std::to_string(i + 1) +
                                  " has no uncertainty");
    const double v = std::abs(triples[i].value);
    const double e = *triples[i].std_error;
    r.significance[i] = e > 0.0 ? v / e : (v == 0.0 ? 0.0 : INFINITY);
    all = all && r.significance[i] > k;
  }
  r.excluded = all;
  r.message = all ? "all bipartite-separable forms excluded (sufficient condition met)" : "inconclusive";
  return r;
}

inline WitnessResult separability_witness(const MomentReport& m, double k = kDefaultSigma) {
  return separability_witness({measured(detail::need(m, mom::kT1)), measured(detail::need(m, mom::kT2)),
                               measured(detail::need(m, mom::kT3)), measured(detail::need(m, mom::kT4))},
                              k);
}

struct PairEntry {
  std::string name;
  double value = 0, std_error = 0, significance = 0;
};

struct PairAuditResult {
  bool pairs_vanish = false;
  std::vector<PairEntry> entries;
  std::string message;
};

/// Checks that every pump/down-converted covariance is consistent with zero.
inline PairAuditResult pair_audit(const MomentReport& m, double k = kDefaultSigma) {
  if (m.values.empty()) throw std::invalid_argument("pair_audit: empty moment report");
  PairAuditResult r;
  r.pairs_vanish = true;
  for (const char* name : {mom::kX0X, mom::kX0Y, mom::kY0X, mom::kY0Y}) {
    const Estimate& e = detail::need(m, name);
    PairEntry p{name, e.value.real(), e.std_error, e.significance()};
    r.pairs_vanish = r.pairs_vanish && p.significance <= k;
    r.entries.push_back(p);
  }
  r.message = r.pairs_vanish
                  ? "pump/down-converted pair correlations vanish: pair-based entanglement criteria cannot see the "
                    "three-mode correlations"
                  : "nonzero pump/down-converted pair correlations present";
  return r;
}

struct OddMomentResult {
  double value = 0, std_error = 0, significance = 0;
  bool non_gaussian = false;
  std::string message;
};

/// Third central moment of the pump amplitude quadrature.
inline OddMomentResult pump_odd_moment(const MomentReport& m, double k = kDefaultSigma) {
  const Estimate& e = detail::need(m, mom::kX0Cubed);
  OddMomentResult r{e.value.real(), e.std_error, e.significance(), false, {}};
  r.non_gaussian = r.significance >= k;
  r.message = r.non_gaussian ? "non-Gaussian pump fluctuations" : "consistent with Gaussian pump fluctuations";
  return r;
}

/// The closed forms drop <dy0^2> as negligible; this checks that against the data.
struct PhaseVarianceCheck {
  double vy0 = 0, vy0_err = 0;
  double vx0 = 0;
  double ratio = 0;  // |vy0| / vx0
  bool negligible = true;
  std::string message;
};

inline PhaseVarianceCheck pump_phase_variance(const MomentReport& m, double limit = 0.1) {
  const Estimate& y = detail::need(m, mom::kVarY0);
  const Estimate& x = detail::need(m, mom::kVarX0);
  PhaseVarianceCheck r;
  r.vy0 = y.value.real();
  r.vy0_err = y.std_error;
  r.vx0 = x.value.real();
  if (r.vx0 == 0.0) {
    r.message = "no pump fluctuations";
    return r;
  }
  r.ratio = std::abs(r.vy0) / r.vx0;
  r.negligible = r.ratio <= limit;
  r.message = r.negligible ? "<dy0^2> negligible against <dx0^2>" : "<dy0^2> not negligible against <dx0^2>";
  return r;
}

}  // namespace opo::criteria
