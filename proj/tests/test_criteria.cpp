#include <random>

#include <gtest/gtest.h>

#include "opo/criteria.hpp"

namespace opo::criteria {
namespace {

const ModelParams kParams(0.5, 1.0, 0.05);

// Classical c-number fields: a_k^+ is the complex conjugate of a_k. The three
// modes share a random common factor so triple correlations are nonzero.
MomentReport classical_report(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double w1 = u(gen), w2 = u(gen), w0 = u(gen), skew = u(gen), noise = 0.2 + std::abs(u(gen));
  MomentAccumulator acc(kParams, 100);
  for (int i = 0; i < 4000; ++i) {
    const cplx common(z(gen), z(gen));
    PhaseSpaceState s;
    s.a1 = w1 * common + noise * cplx(z(gen), z(gen));
    s.a2 = w2 * common + noise * cplx(z(gen), z(gen));
    // Pump tracks a1 a2 so that <da1 da2 da0> is large.
    s.a0 = kParams.pump_fixed_point() + w0 * std::conj(s.a1 * s.a2) + skew * std::norm(common) +
           noise * cplx(z(gen), z(gen));
    s.a1p = std::conj(s.a1);
    s.a2p = std::conj(s.a2);
    s.a0p = std::conj(s.a0);
    acc.accumulate(alpha_to_quadratures(s, kParams));
  }
  return finalize(acc);
}

TEST(CauchySchwarz, ClassicalEnsemblesNeverViolate) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const MomentReport m = classical_report(seed);
    for (auto part : {Partition::kPump, Partition::kSignal, Partition::kIdler})
      for (bool centered : {true, false}) {
        const auto rep = cs_test(m, part, {kDefaultSigma, centered});
        EXPECT_NE(rep.verdict, Verdict::kViolated) << rep.name << " seed " << seed;
        EXPECT_LE(rep.rhs, rep.lhs * (1.0 + 1e-9)) << rep.name << " seed " << seed;
        EXPECT_FALSE(rep.no_signal);
      }
  }
}

TEST(CauchySchwarz, IndependentGaussiansSatisfied) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  MomentAccumulator acc(kParams, 200);
  for (int i = 0; i < 10000; ++i) {
    PhaseSpaceState s;
    s.a0 = kParams.pump_fixed_point() + cplx(z(gen), z(gen));
    s.a1 = cplx(z(gen), z(gen));
    s.a2 = cplx(z(gen), z(gen));
    s.a0p = std::conj(s.a0);
    s.a1p = std::conj(s.a1);
    s.a2p = std::conj(s.a2);
    acc.accumulate(alpha_to_quadratures(s, kParams));
  }
  const auto rep = cs_test(finalize(acc));
  EXPECT_EQ(rep.verdict, Verdict::kSatisfied);
  EXPECT_LT(rep.ratio + 3.0 * rep.ratio_err, 1.0);
  ASSERT_TRUE(rep.lhs_quadrature);
  ASSERT_TRUE(rep.rhs_from_triples);
}

TEST(CauchySchwarz, EmptyFieldsGiveNoSignal) {
  MomentAccumulator acc(kParams, 10);
  for (int i = 0; i < 100; ++i) acc.accumulate(alpha_to_quadratures(fixed_point(kParams), kParams));
  const auto rep = cs_test(finalize(acc));
  EXPECT_TRUE(rep.no_signal);
  EXPECT_EQ(rep.verdict, Verdict::kInconclusive);
}

TEST(CauchySchwarz, MissingChannelRejected) {
  MomentReport m;
  m.params = kParams;
  m.values[mom::kN12] = Estimate::synthetic(1.0, 0.1);
  EXPECT_THROW(cs_test(m), std::invalid_argument);
}

TEST(CauchySchwarz, SyntheticViolationAndLambda) {
  MomentReport m;
  m.params = kParams;
  m.values[mom::kN12] = Estimate::synthetic(1.0, 0.01);
  m.values[mom::kN0] = Estimate::synthetic(2.0, 0.01);
  m.values[mom::kA120] = Estimate::synthetic(cplx(2.0, 0.0), 0.01);
  m.values[mom::kA120Conj] = Estimate::synthetic(cplx(2.0, 0.0), 0.01);
  const auto rep = cs_test(m);
  EXPECT_NEAR(rep.lhs, 2.0, 1e-12);
  EXPECT_NEAR(rep.rhs, 4.0, 1e-12);
  EXPECT_EQ(rep.verdict, Verdict::kViolated);
  EXPECT_GT(rep.significance, 3.0);
  EXPECT_NEAR(rep.lambda_opt.real(), 1.0, 1e-12);
}

TEST(CauchySchwarz, AnalyticVerdicts) {
  const auto hi = cs_test_analytic(analytic::cs_sides_analytic(ModelParams(0.7, 100.0, 0.0071)));
  EXPECT_EQ(hi.verdict, Verdict::kViolated);
  EXPECT_NEAR(hi.ratio, 1.52, 0.01);
  const auto lo = cs_test_analytic(analytic::cs_sides_analytic(ModelParams(0.7, 0.01, 0.0071)));
  EXPECT_EQ(lo.verdict, Verdict::kSatisfied);
  EXPECT_NEAR(lo.ratio, 0.69, 0.01);
  EXPECT_TRUE(cs_test_analytic(analytic::cs_sides_analytic(ModelParams(0.0, 1.0, 0.05))).no_signal);
}

TEST(Witness, AllTriplesSignificantExcludesSeparability) {
  const double s[4] = {1e-3, 2e-3, 3e-3, 4e-3};
  const auto w = separability_witness({Measured{-3 * s[0] * 1.5, s[0]}, Measured{3 * s[1] * 1.5, s[1]},
                                       Measured{3 * s[2] * 1.5, s[2]}, Measured{3 * s[3] * 1.5, s[3]}});
  EXPECT_TRUE(w.excluded);
  for (double sig : w.significance) EXPECT_NEAR(sig, 4.5, 1e-12);
}

TEST(Witness, OneVanishingTripleIsInconclusive) {
  const auto w = separability_witness({Measured{-1.0, 0.1}, Measured{0.05, 0.1}, Measured{1.0, 0.1}, Measured{1.0, 0.1}});
  EXPECT_FALSE(w.excluded);
  EXPECT_EQ(w.message, "inconclusive");
  const auto zero = separability_witness({Measured{0.0, 0.0}, Measured{0.0, 0.0}, Measured{0.0, 0.0}, Measured{0.0, 0.0}});
  EXPECT_FALSE(zero.excluded);
}

TEST(Witness, MissingUncertaintyRejected) {
  EXPECT_THROW(separability_witness({Measured{1.0, 0.1}, Measured{1.0, std::nullopt}, Measured{1.0, 0.1}, Measured{1.0, 0.1}}),
               std::invalid_argument);
}

MomentReport pair_report(double x0x) {
  MomentReport m;
  m.params = kParams;
  m.values[mom::kX0X] = Estimate::synthetic(x0x, 0.001);
  m.values[mom::kX0Y] = Estimate::synthetic(0.0, 0.001);
  m.values[mom::kY0X] = Estimate::synthetic(0.0005, 0.001);
  m.values[mom::kY0Y] = Estimate::synthetic(-0.001, 0.001);
  return m;
}

TEST(PairAudit, DetectsInjectedPairCorrelation) {
  const auto bad = pair_audit(pair_report(0.1));
  EXPECT_FALSE(bad.pairs_vanish);
  EXPECT_NEAR(bad.entries[0].significance, 100.0, 1e-9);
  EXPECT_TRUE(pair_audit(pair_report(0.002)).pairs_vanish);
}

TEST(PairAudit, RejectsEmptyOrIncompleteReports) {
  EXPECT_THROW(pair_audit(MomentReport{}), std::invalid_argument);
  MomentReport m = pair_report(0.0);
  m.values.erase(mom::kY0Y);
  EXPECT_THROW(pair_audit(m), std::invalid_argument);
}

TEST(OddMoment, ThresholdLogic) {
  MomentReport m;
  m.params = kParams;
  m.values[mom::kX0Cubed] = Estimate::synthetic(0.5, 0.1);
  EXPECT_TRUE(pump_odd_moment(m).non_gaussian);
  m.values[mom::kX0Cubed] = Estimate::synthetic(0.1, 0.1);
  EXPECT_FALSE(pump_odd_moment(m).non_gaussian);
}

TEST(PhaseVariance, FlagsNonNegligibleQuadrature) {
  MomentReport m;
  m.params = kParams;
  m.values[mom::kVarX0] = Estimate::synthetic(1.0, 0.01);
  m.values[mom::kVarY0] = Estimate::synthetic(-0.05, 0.01);
  EXPECT_TRUE(pump_phase_variance(m).negligible);
  m.values[mom::kVarY0] = Estimate::synthetic(-0.4, 0.01);
  const auto c = pump_phase_variance(m);
  EXPECT_FALSE(c.negligible);
  EXPECT_NEAR(c.ratio, 0.4, 1e-12);
}

TEST(Estimate, SyntheticCarriesRequestedError) {
  const auto e = Estimate::synthetic(cplx(1.0, 0.0), 0.25, 40);
  EXPECT_NEAR(e.std_error, 0.25, 1e-12);
  EXPECT_EQ(e.n_batches, 40u);
  EXPECT_NEAR(e.significance(), 4.0, 1e-9);
}

}  // namespace
}  // namespace opo::criteria
