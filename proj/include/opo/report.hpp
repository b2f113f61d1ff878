#pragma once

// JSON reports and CSV tables.
//
// CSV layouts (stable; pinned by tests):
//   running.csv : tau,n_samples,lhs,rhs,ratio
//   sweep.csv   : mu,gamma_r,g,mode,lhs,rhs,ratio,significance,verdict
//   compare.csv : moment,mc,mc_err,analytic,pull,rel_dev,closure,closure_pull,low_confidence,pass
// Cauchy-Schwarz sides are quadrature-normalized (q4 (vx0 + vy0) vs s^2) so Monte
// Carlo and closed-form columns are directly comparable.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "opo/analytic.hpp"
#include "opo/criteria.hpp"
#include "opo/ensemble.hpp"
#include "opo/moments.hpp"
#include "opo/sde.hpp"

#ifndef OPO_VERSION
#define OPO_VERSION "0.1.0"
#endif

namespace opo::report {

using nlohmann::json;

inline constexpr const char* kVersion = OPO_VERSION;

inline constexpr const char* kRunningHeader = "tau,n_samples,lhs,rhs,ratio";
inline constexpr const char* kSweepHeader = "mu,gamma_r,g,mode,lhs,rhs,ratio,significance,verdict";
inline constexpr const char* kCompareHeader =
    "moment,mc,mc_err,analytic,pull,rel_dev,closure,closure_pull,low_confidence,pass";

/// Fixed-format number for CSV cells; empty for NaN.
inline std::string num(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

inline json to_json(const ModelParams& p) {
  return {{"mu", p.mu()}, {"gamma_r", p.gamma_r()}, {"g", p.g()}, {"eps", p.eps()}};
}

inline json to_json(const SimConfig& c) {
  return {{"dt", c.dt},
          {"burn_in", c.burn_in},
          {"sample_interval", c.sample_interval},
          {"n_samples_per_traj", c.n_samples_per_traj},
          {"n_trajectories", c.n_trajectories},
          {"master_seed", c.master_seed},
          {"divergence_threshold", c.divergence_threshold},
          {"stepper", to_string(c.stepper)},
          {"burn_in_steps", c.burn_in_steps()},
          {"steps_per_sample", c.steps_per_sample()}};
}

inline json to_json(const Estimate& e) {
  return {{"re", e.value.real()},
          {"im", e.value.imag()},
          {"std_error", e.std_error},
          {"std_error_imag", e.std_error_imag},
          {"n_batches", e.n_batches},
          {"low_confidence", e.low_confidence}};
}

inline json to_json(const MomentReport& m) {
  json values = json::object();
  for (const auto& [name, e] : m.values) values[name] = to_json(e);
  return {{"n_samples", m.n_samples}, {"n_batches", m.n_batches}, {"low_confidence", m.low_confidence}, {"values", values}};
}

inline json to_json(const criteria::CriterionReport& r) {
  json j = {{"name", r.name},
            {"lhs", r.lhs},
            {"lhs_err", r.lhs_err},
            {"rhs", r.rhs},
            {"rhs_err", r.rhs_err},
            {"ratio", r.ratio},
            {"ratio_err", r.ratio_err},
            {"significance", r.significance},
            {"verdict", criteria::to_string(r.verdict)},
            {"sigma_threshold", r.sigma_threshold},
            {"lambda_opt", {r.lambda_opt.real(), r.lambda_opt.imag()}},
            {"no_signal", r.no_signal},
            {"low_confidence", r.low_confidence}};
  if (r.lhs_quadrature) j["lhs_quadrature"] = *r.lhs_quadrature;
  if (r.rhs_quadrature) j["rhs_quadrature"] = *r.rhs_quadrature;
  if (r.rhs_from_triples) {
    j["rhs_from_triples"] = *r.rhs_from_triples;
    j["rhs_from_triples_err"] = *r.rhs_from_triples_err;
  }
  return j;
}

inline json to_json(const criteria::WitnessResult& w) {
  return {{"excluded", w.excluded}, {"significance", w.significance}, {"message", w.message}};
}

inline json to_json(const criteria::PairAuditResult& a) {
  json entries = json::array();
  for (const auto& e : a.entries)
    entries.push_back({{"name", e.name}, {"value", e.value}, {"std_error", e.std_error}, {"significance", e.significance}});
  return {{"pairs_vanish", a.pairs_vanish}, {"entries", entries}, {"message", a.message}};
}

inline json to_json(const criteria::OddMomentResult& o) {
  return {{"value", o.value}, {"std_error", o.std_error}, {"significance", o.significance},
          {"non_gaussian", o.non_gaussian}, {"message", o.message}};
}

inline json to_json(const criteria::PhaseVarianceCheck& c) {
  return {{"vy0", c.vy0}, {"vy0_err", c.vy0_err}, {"vx0", c.vx0}, {"ratio", c.ratio}, {"negligible", c.negligible},
          {"message", c.message}};
}

inline json to_json(const analytic::CsSides& cs) {
  json j = {{"lhs", cs.lhs}, {"rhs", cs.rhs}};
  j["ratio"] = cs.ratio ? json(*cs.ratio) : json(nullptr);
  j["verdict"] = cs.ratio ? (cs.violated() ? "violated" : "satisfied") : "no signal";
  return j;
}

/// Closed-form predictions at p (quadrature normalization).
inline json analytic_json(const ModelParams& p) {
  const auto z = analytic::zeroth_order(p);
  const auto t = analytic::triple_correlations(p);
  const auto m = analytic::second_moments(p);
  const auto ou = analytic::ou_covariances(p);
  const auto gc = analytic::gaussian_closure(p);
  return {{"zeroth_order", {{"x0", z.x0}, {"y0", z.y0}, {"x", z.x}, {"y", z.y}}},
          {"triple_correlations", {{"t1", t.t1}, {"t2", t.t2}, {"t3", t.t3}, {"t4", t.t4}, {"s", t.s()}}},
          {"second_moments", {{"q4", m.q4}, {"vx0", m.vx0}, {"vy0", m.vy0}}},
          {"cs_sides", to_json(analytic::cs_sides_analytic(p))},
          {"ou_covariances", {{"xxp", ou.xxp}, {"yyp", ou.yyp}}},
          {"gaussian_closure",
           {{"t1", gc.t1}, {"t2", gc.t2}, {"t3", gc.t3}, {"t4", gc.t4}, {"vx0", gc.vx0}, {"vy0", gc.vy0},
            {"q4", gc.q4}, {"x0_shift", gc.x0_shift}, {"cs_sides", to_json(gc.cs_sides())}}},
          {"amplitude_cs_scale", analytic::amplitude_cs_scale(p)}};
}

struct RunningRow {
  double tau = 0;
  std::int64_t n_samples = 0;
  double lhs = 0, rhs = 0, ratio = 0;
};

/// Cumulative Cauchy-Schwarz sides (pump partition, centered) after each time bin.
inline std::vector<RunningRow> running_averages(const EnsembleResult& r) {
  std::vector<RunningRow> rows;
  const ModelParams& p = r.moments.params();
  const double scale = analytic::amplitude_cs_scale(p);
  RawMoments cum;
  for (std::size_t k = 0; k < r.time_bins.size(); ++k) {
    cum.merge(r.time_bins[k]);
    if (cum.count() == 0) continue;
    const auto v = evaluate_moments(cum, r.moments.center(), p);
    RunningRow row;
    row.tau = r.bin_end_tau[k];
    row.n_samples = cum.count();
    row.lhs = v.at(mom::kN12).real() * v.at(mom::kN0).real() / scale;
    row.rhs = std::norm(v.at(mom::kA120)) / scale;
    row.ratio = row.lhs != 0.0 ? row.rhs / row.lhs : NAN;
    rows.push_back(row);
  }
  return rows;
}

inline void write_running_csv(std::ostream& os, const std::vector<RunningRow>& rows) {
  os << kRunningHeader << '\n';
  for (const auto& r : rows)
    os << num(r.tau) << ',' << r.n_samples << ',' << num(r.lhs) << ',' << num(r.rhs) << ',' << num(r.ratio) << '\n';
}

struct SweepRow {
  double mu = 0, gamma_r = 0, g = 0;
  std::string mode;  // analytic | montecarlo
  double lhs = 0, rhs = 0, ratio = NAN, significance = NAN;
  std::string verdict;
};

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows)
    os << num(r.mu) << ',' << num(r.gamma_r) << ',' << num(r.g) << ',' << r.mode << ',' << num(r.lhs) << ','
       << num(r.rhs) << ',' << num(r.ratio) << ',' << num(r.significance) << ',' << r.verdict << '\n';
}

inline SweepRow analytic_sweep_row(const ModelParams& p) {
  const auto cs = analytic::cs_sides_analytic(p);
  SweepRow row{p.mu(), p.gamma_r(), p.g(), "analytic", cs.lhs, cs.rhs, NAN, NAN, "no signal"};
  if (cs.ratio) {
    row.ratio = *cs.ratio;
    row.verdict = cs.violated() ? "violated" : "satisfied";
  }
  return row;
}

inline SweepRow montecarlo_sweep_row(const ModelParams& p, const criteria::CriterionReport& cs) {
  SweepRow row{p.mu(), p.gamma_r(), p.g(), "montecarlo",
               cs.lhs_quadrature.value_or(NAN), cs.rhs_quadrature.value_or(NAN),
               cs.no_signal ? NAN : cs.ratio, cs.no_signal ? NAN : cs.significance,
               cs.no_signal ? "no signal" : criteria::to_string(cs.verdict)};
  return row;
}

struct CompareRow {
  std::string moment;
  double mc = 0, mc_err = 0, analytic = 0, pull = 0, rel_dev = 0, closure = 0, closure_pull = 0;
  bool low_confidence = false;
  bool pass = false;  // |pull| <= sigma threshold
};

/// Monte Carlo estimate against the closed forms for the comparison moment set.
inline std::vector<CompareRow> compare_rows(const MomentReport& m, double k = criteria::kDefaultSigma) {
  const ModelParams& p = m.params;
  const auto t = analytic::triple_correlations(p);
  const auto s = analytic::second_moments(p);
  const auto ou = analytic::ou_covariances(p);
  const auto gc = analytic::gaussian_closure(p);
  const struct {
    const char* name;
    double analytic, closure;
  } table[] = {{mom::kT1, t.t1, gc.t1},   {mom::kT2, t.t2, gc.t2},     {mom::kT3, t.t3, gc.t3},
               {mom::kT4, t.t4, gc.t4},   {mom::kQ4, s.q4, gc.q4},     {mom::kVarX0, s.vx0, gc.vx0},
               {mom::kXXp, ou.xxp, ou.xxp}, {mom::kYYp, ou.yyp, ou.yyp}};
  std::vector<CompareRow> rows;
  for (const auto& e : table) {
    const Estimate& est = m.at(e.name);
    CompareRow r;
    r.moment = e.name;
    r.mc = est.value.real();
    r.mc_err = est.std_error;
    r.analytic = e.analytic;
    r.pull = r.mc_err > 0 ? (r.mc - r.analytic) / r.mc_err : (r.mc == r.analytic ? 0.0 : INFINITY);
    r.rel_dev = r.analytic != 0 ? (r.mc - r.analytic) / std::abs(r.analytic) : NAN;
    r.closure = e.closure;
    r.closure_pull = r.mc_err > 0 ? (r.mc - r.closure) / r.mc_err : (r.mc == r.closure ? 0.0 : INFINITY);
    r.low_confidence = est.low_confidence;
    r.pass = std::abs(r.pull) <= k;
    rows.push_back(r);
  }
  return rows;
}

inline void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows) {
  os << kCompareHeader << '\n';
  for (const auto& r : rows)
    os << r.moment << ',' << num(r.mc) << ',' << num(r.mc_err) << ',' << num(r.analytic) << ',' << num(r.pull) << ','
       << num(r.rel_dev) << ',' << num(r.closure) << ',' << num(r.closure_pull) << ',' << (r.low_confidence ? 1 : 0)
       << ',' << (r.pass ? 1 : 0) << '\n';
}

inline json to_json(const std::vector<CompareRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"moment", r.moment}, {"mc", r.mc}, {"mc_err", r.mc_err}, {"analytic", r.analytic},
                   {"pull", r.pull}, {"rel_dev", r.rel_dev}, {"closure", r.closure},
                   {"closure_pull", r.closure_pull}, {"low_confidence", r.low_confidence}, {"pass", r.pass}});
  return arr;
}

/// All verdicts derivable from a moment report.
inline json criteria_json(const MomentReport& m, double k) {
  json cs = json::array();
  criteria::CsOptions opt;
  opt.sigma_threshold = k;
  for (auto part : {criteria::Partition::kPump, criteria::Partition::kSignal, criteria::Partition::kIdler})
    cs.push_back(to_json(criteria::cs_test(m, part, opt)));
  opt.centered = false;
  cs.push_back(to_json(criteria::cs_test(m, criteria::Partition::kPump, opt)));
  return {{"cauchy_schwarz", cs},
          {"separability_witness", to_json(criteria::separability_witness(m, k))},
          {"pair_audit", to_json(criteria::pair_audit(m, k))},
          {"pump_odd_moment", to_json(criteria::pump_odd_moment(m, k))},
          {"pump_phase_variance", to_json(criteria::pump_phase_variance(m))}};
}

}  // namespace opo::report
