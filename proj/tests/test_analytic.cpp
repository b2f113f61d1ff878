#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "opo/analytic.hpp"

namespace opo::analytic {
namespace {

// Collects warnings for the lifetime of the guard.
struct CaptureWarnings {
  std::vector<std::string> seen;
  WarningSink saved = warning_sink();
  CaptureWarnings() {
    warning_sink() = [this](const std::string& m) { seen.push_back(m); };
  }
  ~CaptureWarnings() { warning_sink() = saved; }
};

double g8(double g) { return std::pow(g, 8); }

TEST(ZerothOrder, PumpAmplitudeIsTwiceMu) {
  EXPECT_EQ(zeroth_order(ModelParams(0.0, 1.0, 0.05)).x0, 0.0);
  EXPECT_DOUBLE_EQ(zeroth_order(ModelParams(0.7, 1.0, 0.05)).x0, 1.4);
  const auto z = zeroth_order(ModelParams(0.7, 1.0, 0.05));
  EXPECT_EQ(z.y0 + z.x + z.y + z.xp + z.yp, 0.0);
}

TEST(ZerothOrder, NearThresholdWarns) {
  CaptureWarnings w;
  EXPECT_DOUBLE_EQ(zeroth_order(ModelParams(0.999, 1.0, 0.05)).x0, 1.998);
  ASSERT_EQ(w.seen.size(), 1u);
  EXPECT_NE(w.seen[0].find("near-threshold"), std::string::npos);
}

TEST(ZerothOrder, ThresholdRejected) {
  EXPECT_THROW(zeroth_order(ModelParams(1.0, 1.0, 0.05)), std::domain_error);
  EXPECT_THROW(triple_correlations(ModelParams(1.5, 1.0, 0.05)), std::domain_error);
  EXPECT_THROW(second_moments(ModelParams(1.0, 1.0, 0.05)), std::domain_error);
  EXPECT_THROW(cs_sides_analytic(ModelParams(1.0, 1.0, 0.05)), std::domain_error);
}

TEST(TripleCorrelations, ReferenceValues) {
  const auto t = triple_correlations(ModelParams(0.5, 2.0, 1.0));
  EXPECT_NEAR(t.t1, -2.0, 1e-12);
  EXPECT_NEAR(t.t2, 0.488888888889, 1e-9);
  EXPECT_NEAR(t.t3, 0.166666666667, 1e-9);
  EXPECT_DOUBLE_EQ(t.t4, t.t3);
  EXPECT_NEAR(triple_correlations(ModelParams(0.7, 100.0, 0.0071)).t1, -3.00295e-8, 1e-12);
  const auto zero = triple_correlations(ModelParams(0.0, 1.0, 0.05));
  EXPECT_EQ(zero.t1, 0.0);
  EXPECT_EQ(zero.t2, 0.0);
  EXPECT_EQ(zero.t3, 0.0);
  EXPECT_EQ(zero.t4, 0.0);
}

TEST(TripleCorrelations, SignPattern) {
  for (double mu : {0.05, 0.3, 0.5, 0.7, 0.85})
    for (double gr : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      const auto t = triple_correlations(ModelParams(mu, gr, 0.05));
      EXPECT_LT(t.t1, 0.0);
      EXPECT_GT(t.t2, 0.0);
      EXPECT_GT(t.t3, 0.0);
      EXPECT_EQ(t.t3, t.t4);
      EXPECT_GT(t.s(), 0.0);
    }
}

TEST(SecondMoments, ReferenceValues) {
  for (double gr : {0.01, 2.0, 100.0}) EXPECT_NEAR(second_moments(ModelParams(0.5, gr, 1.0)).q4, 2.222222222222, 1e-9);
  EXPECT_NEAR(second_moments(ModelParams(0.5, 2.0, 1.0)).vx0, 2.666666666667, 1e-9);
  const auto zero = second_moments(ModelParams(0.0, 1.0, 0.05));
  EXPECT_EQ(zero.q4, 0.0);
  EXPECT_EQ(zero.vx0, 0.0);
  EXPECT_EQ(second_moments(ModelParams(0.5, 2.0, 1.0)).vy0, 0.0);
}

TEST(CsSides, FigureOneVerdicts) {
  for (double g : {0.0071, 0.05, 1.0}) {
    const auto hi = cs_sides_analytic(ModelParams(0.7, 100.0, g));
    EXPECT_NEAR(hi.lhs / g8(g), 147.6408, 1e-3);
    EXPECT_NEAR(hi.rhs / g8(g), 224.8621, 1e-3);
    ASSERT_TRUE(hi.ratio);
    EXPECT_NEAR(*hi.ratio, 1.523035, 1e-6);
    EXPECT_TRUE(hi.violated());

    const auto lo = cs_sides_analytic(ModelParams(0.7, 0.01, g));
    EXPECT_NEAR(lo.lhs / g8(g), 84.6267, 1e-3);
    EXPECT_NEAR(lo.rhs / g8(g), 58.2913, 1e-3);
    ASSERT_TRUE(lo.ratio);
    EXPECT_NEAR(*lo.ratio, 0.688805, 1e-6);
    EXPECT_FALSE(lo.violated());
  }
}

TEST(CsSides, NoSignalWithoutPump) {
  const auto cs = cs_sides_analytic(ModelParams(0.0, 1.0, 0.05));
  EXPECT_EQ(cs.lhs, 0.0);
  EXPECT_EQ(cs.rhs, 0.0);
  EXPECT_FALSE(cs.ratio.has_value());
  EXPECT_FALSE(cs.violated());
}

TEST(Scaling, FourthPowerOfCoupling) {
  for (double mu : {0.2, 0.5, 0.8})
    for (double gr : {0.01, 1.0, 100.0}) {
      const ModelParams a(mu, gr, 0.05), b(mu, gr, 0.1);
      const auto ta = triple_correlations(a), tb = triple_correlations(b);
      const auto sa = second_moments(a), sb = second_moments(b);
      for (auto [x, y] : {std::pair{ta.t1, tb.t1}, {ta.t2, tb.t2}, {ta.t3, tb.t3}, {ta.t4, tb.t4}, {sa.q4, sb.q4}, {sa.vx0, sb.vx0}})
        EXPECT_NEAR(y / x, 16.0, 1e-12);
      EXPECT_NEAR(*cs_sides_analytic(a).ratio, *cs_sides_analytic(b).ratio, 1e-12);
    }
}

TEST(Ratio, GrowsWithPumpDampingRatio) {
  for (double mu : {0.3, 0.5, 0.7, 0.85}) {
    double prev = 0.0;
    for (double gr : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      const double r = *cs_sides_analytic(ModelParams(mu, gr, 0.05)).ratio;
      EXPECT_GT(r, prev);
      prev = r;
    }
    EXPECT_GT(*cs_sides_analytic(ModelParams(mu, 100.0, 0.05)).ratio, *cs_sides_analytic(ModelParams(mu, 0.01, 0.05)).ratio);
  }
}

TEST(PairCovariances, OrnsteinUhlenbeckValues) {
  const auto c = ou_covariances(ModelParams(0.5, 1.0, 0.05));
  EXPECT_NEAR(c.xxp, 2.5e-3, 1e-15);
  EXPECT_NEAR(c.yyp, -0.0025 / 3.0, 1e-15);
}

// The closure is derived independently; where it overlaps the closed forms it must agree.
TEST(GaussianClosure, AgreesWhereFormulasOverlap) {
  for (double mu : {0.2, 0.5, 0.7})
    for (double gr : {0.01, 1.0, 100.0}) {
      const ModelParams p(mu, gr, 0.05);
      const auto gc = gaussian_closure(p);
      const auto t = triple_correlations(p);
      EXPECT_NEAR(gc.t3 / t.t3, 1.0, 1e-12);
      EXPECT_NEAR(gc.q4 / second_moments(p).q4, 1.0, 1e-12);
      EXPECT_LT(gc.t1, 0.0);
      EXPECT_GT(gc.t2, 0.0);
      EXPECT_LT(gc.vy0, 0.0);
      EXPECT_NEAR(gc.x0_shift, -p.g() * p.g() * 2.0 * mu / (1.0 - mu * mu), 1e-15);
    }
}

TEST(GaussianClosure, ReferenceValues) {
  // Units of g^4 at mu = 0.5, gamma_r = 1.
  const ModelParams p(0.5, 1.0, 1.0);
  const auto gc = gaussian_closure(p);
  EXPECT_NEAR(gc.t1, -0.5, 1e-12);
  EXPECT_NEAR(gc.t2, 1.0 / 36.0, 1e-12);
  EXPECT_NEAR(gc.t3, 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(gc.vx0, 0.5 + 1.0 / 36.0, 1e-12);
  EXPECT_NEAR(gc.vy0, -2.0 / 9.0, 1e-12);
  EXPECT_NEAR(gc.q4, 2.0 * (1.0 + 1.0 / 9.0), 1e-12);
}

TEST(AmplitudeScale, MatchesTransform) {
  const ModelParams p(0.5, 3.0, 0.02);
  EXPECT_NEAR(amplitude_cs_scale(p) * 128.0 * std::pow(0.02, 6) * 3.0, 1.0, 1e-12);
}

}  // namespace
}  // namespace opo::analytic
