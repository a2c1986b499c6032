#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cohomflow/profiles.hpp"

using namespace cohomflow;
using std::numbers::pi;

TEST(TransitionProfile, StartsAtZeroWithGivenSlope) {
  const auto t = transition_profile(1.0, 1.0, 0.0);
  EXPECT_EQ(t.value, 0.0);
  EXPECT_DOUBLE_EQ(t.d1, 1.0);
  EXPECT_EQ(t.d2, 0.0);
}

TEST(TransitionProfile, PlateauPastWidth) {
  const auto t = transition_profile(1.0, 1.0, 2.0);
  const auto at1 = transition_profile(1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(t.value, at1.value);
  EXPECT_DOUBLE_EQ(t.value, 0.5);
  EXPECT_EQ(t.d1, 0.0);
  EXPECT_EQ(t.d2, 0.0);
  EXPECT_EQ(t.d3, 0.0);
}

TEST(TransitionProfile, ValueIsContinuousIntoPlateau) {
  const auto near = transition_profile(2.0, 0.5, 0.5 * (1 - 1e-9));
  EXPECT_NEAR(near.value, 0.5, 1e-12);
  EXPECT_LT(std::abs(near.d1), 1e-12 * 2.0);
}

TEST(TransitionProfile, DerivativesMatchFiniteDifferences) {
  const double s0 = 2.0, r1 = 0.5, q = 0.25, e = 1e-6;
  const auto t = transition_profile(s0, r1, q);
  EXPECT_GT(t.value, 0.0);
  EXPECT_LE(t.value, 2.0 * 0.25);
  EXPECT_GT(t.d1, 0.0);
  EXPECT_LE(t.d1, 2.0);
  EXPECT_LE(t.d2, 0.0);
  const auto p = transition_profile(s0, r1, q + e), m = transition_profile(s0, r1, q - e);
  EXPECT_NEAR((p.value - m.value) / (2 * e), t.d1, 1e-4 * std::abs(t.d1));
  EXPECT_NEAR((p.d1 - m.d1) / (2 * e), t.d2, 1e-4 * std::abs(t.d2));
  EXPECT_NEAR((p.d2 - m.d2) / (2 * e), t.d3, 1e-4 * std::abs(t.d3) + 1e-8);
}

TEST(TransitionProfile, MonotoneAndConcave) {
  double prev_v = -1, prev_d1 = 3;
  for (int k = 0; k <= 400; ++k) {
    const auto t = transition_profile(2.0, 0.5, 0.6 * k / 400.0);
    EXPECT_GE(t.value, prev_v);
    EXPECT_LE(t.d1, prev_d1 + 1e-15);
    EXPECT_LE(t.d2, 1e-15);
    prev_v = t.value;
    prev_d1 = t.d1;
  }
}

TEST(TransitionProfile, RejectsNonpositiveParameters) {
  EXPECT_THROW(transition_profile(0.0, 1.0, 0.1), InvalidArgument);
  EXPECT_THROW(transition_profile(1.0, -1.0, 0.1), InvalidArgument);
  EXPECT_THROW(transition_profile(1.0, 1.0, -0.1), InvalidArgument);
}

TEST(ModelMetric, RoundSphereValuesAtSixthPi) {
  const auto m = model_profile(ModelMetric::RoundS4, pi / 6);
  EXPECT_NEAR(m.v[1], 1.0, 1e-15);
  EXPECT_NEAR(m.v[2], 2.0, 1e-15);
  EXPECT_NEAR(m.v[3], 1.0, 1e-15);
}

TEST(ModelMetric, RoundSphereScalesWithBracketConstant) {
  // N odd puts the middle node at L/2 = pi/6.
  const Grid g(401, pi / 3);
  const auto P = build_model_metric(ModelMetric::RoundS4, g, 2.0);
  ASSERT_NEAR(g.r(200), pi / 6, 1e-15);
  EXPECT_NEAR(P.phi()[200], 2.0, 1e-14);
  EXPECT_NEAR(P.psi()[200], 4.0, 1e-14);
  EXPECT_NEAR(P.xi()[200], 2.0, 1e-14);
  EXPECT_EQ(P.zeta()[200], 1.0);
}

TEST(ModelMetric, FubiniStudyValuesAtSixthPi) {
  const auto m = model_profile(ModelMetric::FubiniStudy, pi / 6);
  EXPECT_NEAR(m.v[1], 0.5, 1e-15);
  EXPECT_NEAR(m.v[2], 0.5, 1e-15);
  EXPECT_NEAR(m.v[3], std::sqrt(3.0) / 2, 1e-15);
}

TEST(ModelMetric, RejectsWrongLength) {
  EXPECT_THROW(build_model_metric(ModelMetric::RoundS4, Grid(100, 1.0), 1.0), InvalidArgument);
  EXPECT_THROW(build_model_metric(ModelMetric::FubiniStudy, Grid(100, pi / 3), 1.0),
               InvalidArgument);
  EXPECT_NO_THROW(build_model_metric(ModelMetric::ProductCylinder, Grid(100, 3.7), 2.0));
}

TEST(ModelMetric, CylinderIsConstant) {
  const auto P = build_model_metric(ModelMetric::ProductCylinder, Grid(50, 2.0), 2.0, 1.5);
  for (int a = 1; a <= 3; ++a)
    for (double v : P.f[a]) EXPECT_EQ(v, 1.5);
}

TEST(ModelMetric, RoundSphereEigenfunctionsUnderFiniteDifferences) {
  const Grid g(400, pi / 3);
  auto P = build_model_metric(ModelMetric::RoundS4, g, 2.0);
  P.exact.reset();
  const auto J = node_jets(P);
  const double h = g.h();
  for (int i = 0; i < g.N; ++i)
    for (int a = 1; a <= 3; ++a)
      EXPECT_NEAR(-J[i].d2[a] / J[i].f[a], 1.0, 10 * h * h) << "node " << i << " profile " << a;
}

TEST(GroveZiller, S4ProfilesShape) {
  const auto spec = ManifoldSpec::make(Family::S4, 2.0);
  const Grid g(401, spec.L);
  const auto P = build_grove_ziller(spec, 1.0, spec.L / 4, g);
  for (int a = 1; a <= 3; ++a) EXPECT_NEAR(P.f[a][200], 1.0, 1e-14);
  // phi rises, xi falls, psi constant.
  EXPECT_LT(P.phi()[0], 0.1);
  EXPECT_NEAR(P.phi()[g.N - 1], 1.0, 1e-14);
  EXPECT_LT(P.xi()[g.N - 1], 0.1);
  EXPECT_NEAR(P.xi()[0], 1.0, 1e-14);
  for (double v : P.psi()) EXPECT_EQ(v, 1.0);
  for (double v : P.zeta()) EXPECT_EQ(v, 1.0);
  EXPECT_TRUE(P.all_positive());
}

TEST(GroveZiller, CollapsingSlopeMatchesSpec) {
  const auto spec = ManifoldSpec::make(Family::S4, 1.0);
  const Grid g(800, spec.L);
  const auto P = build_grove_ziller(spec, 1.0, spec.L / 4, g);
  EXPECT_NEAR(GzCollapse(1.0, 2.0, spec.L / 4)(0.0)[1], 2.0, 1e-14);
  EXPECT_LT(check_smoothness(P).minus.slope, 1e-6);
  EXPECT_NEAR(calibrate_slope(spec, false, 0.5, 8.0), 2.0, 0.02);
}

TEST(GroveZiller, MnBumpIsSymmetric) {
  const auto spec = ManifoldSpec::make(Family::Mn, 2.0, 2);
  const Grid g(400, spec.L);
  const auto P = build_grove_ziller(spec, 1.0, spec.L / 4, g);
  for (int i = 0; i < g.N; ++i) {
    EXPECT_EQ(P.psi()[i], 1.0);
    EXPECT_EQ(P.xi()[i], 1.0);
    EXPECT_NEAR(P.phi()[i], P.phi()[g.N - 1 - i], 1e-13);
  }
  EXPECT_NEAR(P.phi()[g.N / 2], 1.0, 1e-14);
}

TEST(GroveZiller, DerivativesMatchFiniteDifferences) {
  const auto spec = ManifoldSpec::make(Family::CP2, 2.0);
  const Grid g(1600, spec.L);
  auto P = build_grove_ziller(spec, 1.0, spec.L / 4, g);
  const auto exact = *P.exact;
  P.exact.reset();
  const auto J = node_jets(P);
  for (int i = 0; i < g.N; ++i)
    for (int a = 1; a <= 3; ++a) {
      EXPECT_NEAR(J[i].d1[a], exact.d1[a][i], 1e-5);
      EXPECT_NEAR(J[i].d2[a], exact.d2[a][i], 1e-3);
    }
}

TEST(GroveZiller, RejectsSteepTransition) {
  const auto spec = ManifoldSpec::make(Family::S4, 2.0);
  const Grid g(200, spec.L);
  EXPECT_THROW(build_grove_ziller(spec, 1.0, 0.3, g), InvalidArgument);
  EXPECT_THROW(build_grove_ziller(spec, 1.0, 0.6 * spec.L, g), InvalidArgument);
  auto bad = spec;
  bad.collapse_minus = 2;  // not fixed by swap(2,3)
  EXPECT_THROW(build_grove_ziller(bad, 1.0, spec.L / 4, g), InvalidArgument);
}

TEST(Smoothness, RoundSphereResidualsSmall) {
  const Grid g(400, pi / 3);
  const auto P = build_model_metric(ModelMetric::RoundS4, g, 1.0);
  const auto r = check_smoothness(P);
  const double h = g.h();
  for (const auto* p : {&r.minus, &r.plus}) {
    EXPECT_LT(p->slope, 10 * h * h);
    EXPECT_LT(p->pole_equality, 10 * h * h);
    EXPECT_LT(p->parity, 10 * h * h);
  }
  EXPECT_FALSE(r.flagged());
}

TEST(Smoothness, ModelResidualsConvergeAtSecondOrder) {
  for (auto model : {ModelMetric::RoundS4, ModelMetric::FubiniStudy}) {
    const auto a = check_smoothness(build_model_metric(model, Grid(20, model_length(model)), 1.0));
    const auto b = check_smoothness(build_model_metric(model, Grid(40, model_length(model)), 1.0));
    for (bool plus : {false, true}) {
      const auto& pa = plus ? a.plus : a.minus;
      const auto& pb = plus ? b.plus : b.minus;
      EXPECT_GE(pa.slope / pb.slope, 3.5);
      if (pa.pole_equality > 1e-13) {
        EXPECT_GE(pa.pole_equality / pb.pole_equality, 3.5);
      }
      EXPECT_GE(pa.parity / pb.parity, 3.5);
    }
  }
}

TEST(Smoothness, GroveZillerPoleEqualityExact) {
  const auto spec = ManifoldSpec::make(Family::S4, 2.0);
  const auto P = build_grove_ziller(spec, 1.0, spec.L / 4, Grid(400, spec.L));
  const auto r = check_smoothness(P);
  EXPECT_EQ(r.minus.pole_equality, 0.0);
  EXPECT_EQ(r.plus.pole_equality, 0.0);
  EXPECT_LT(r.minus.slope, 1e-4);
  EXPECT_LT(r.plus.slope, 1e-4);
  EXPECT_FALSE(r.flagged());
}

TEST(Smoothness, HalvedSlopeIsFlagged) {
  const Grid g(400, pi / 3);
  auto P = build_model_metric(ModelMetric::RoundS4, g, 1.0);
  for (double& v : P.f[1]) v *= 0.5;
  const auto r = check_smoothness(P);
  EXPECT_NEAR(r.minus.slope, 1.0, 0.01);
  EXPECT_TRUE(r.minus.flagged());
}

TEST(CalibrateSlope, S4MatchesRoundSphere) {
  const auto spec = ManifoldSpec::make(Family::S4, 1.0);
  EXPECT_NEAR(calibrate_slope(spec, false, 0.5, 8.0), 2.0, 0.02);
  EXPECT_NEAR(calibrate_slope(spec, true, 0.5, 8.0), 2.0, 0.02);
}

TEST(CalibrateSlope, CP2MatchesFubiniStudy) {
  const auto spec = ManifoldSpec::make(Family::CP2, 1.0);
  EXPECT_NEAR(calibrate_slope(spec, true, 0.5, 8.0), 2.0, 0.02);
  EXPECT_NEAR(calibrate_slope(spec, false, 0.3, 8.0), 1.0, 0.01);
}

TEST(CalibrateSlope, MnFixture) {
  // n = 1, c = 2; recorded fixture value.
  const auto spec = ManifoldSpec::make(Family::Mn, 2.0, 1);
  EXPECT_NEAR(calibrate_slope(spec, false, 0.5, 8.0), 2.0, 1e-6);
}

TEST(CalibrateSlope, ReportsMissingSignChange) {
  const auto spec = ManifoldSpec::make(Family::S4, 1.0);
  EXPECT_THROW(calibrate_slope(spec, false, 3.0, 8.0), InvalidArgument);
  EXPECT_THROW(calibrate_slope(spec, false, -1.0, 8.0), InvalidArgument);
}
