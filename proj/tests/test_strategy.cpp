#include <gtest/gtest.h>

#include <random>

#include "funnel_sqp/strategy.hpp"
#include "invariants.hpp"

using namespace funnel_sqp;

namespace {

TrialAssessment trial(double f0, double h0, double f1, double h1, double dmf,
                      double dmh = 0.0) {
  TrialAssessment t;
  t.f_current = f0;
  t.h_current = h0;
  t.f_trial = f1;
  t.h_trial = h1;
  t.step_norm = 1.0;
  t.models.predicted_f = dmf;
  t.models.predicted_h = dmh;
  return t;
}

}  // namespace

TEST(FunnelWidth, Initial) {
  const FunnelParameters p;
  EXPECT_EQ(funnel_initial_width(5.28e-10, p), 100.0);
  EXPECT_EQ(funnel_initial_width(0.0, p), 100.0);
  EXPECT_EQ(funnel_initial_width(1000.0, p), 1250.0);
}

TEST(FunnelWidth, Update) {
  const FunnelParameters p;
  EXPECT_EQ(funnel_update(100.0, 10.0, 50.0, p), 55.0);
  EXPECT_EQ(funnel_update(100.0, 0.0, 50.0, p), 50.0);
  FunnelParameters g;
  g.gould_update = true;
  // max(0.99·100, 0.5·10 + 0.5·50)
  EXPECT_EQ(funnel_update(100.0, 10.0, 50.0, g), 99.0);
}

TEST(FunnelWidth, UpdateContractsByTheta) {
  const FunnelParameters p;
  EXPECT_DOUBLE_EQ(p.contraction(), 0.995);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double tau = 1e-6 + 1e3 * u(rng);
    const double h_trial = p.beta * tau * u(rng);
    EXPECT_LE(funnel_update(tau, h_trial, tau * u(rng), p), p.contraction() * tau);
    FunnelParameters g = p;
    g.gould_update = true;
    EXPECT_LE(funnel_update(tau, h_trial, tau * u(rng), g), p.contraction() * tau * (1 + 1e-15));
  }
}

TEST(Funnel, RejectsOutsideWidth) {
  FunnelStrategy s;
  s.initialize(0.0, 0.0);
  const auto v = s.assess(trial(0.0, 1.0, -100.0, 101.0, 1e6));
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.rejection, Rejection::Funnel);
}

TEST(Funnel, SwitchingWithZeroInfeasibilityIsPureArmijo) {
  FunnelStrategy s;
  s.initialize(0.0, 0.0);
  auto good = s.assess(trial(1.0, 0.0, 0.5, 0.0, 0.5));
  EXPECT_TRUE(good.switching);
  EXPECT_TRUE(good.accepted);
  EXPECT_EQ(good.type, StepType::FType);
  auto bad = s.assess(trial(1.0, 0.0, 1.0, 0.0, 0.5));
  EXPECT_FALSE(bad.accepted);
  EXPECT_EQ(bad.rejection, Rejection::Armijo);
}

TEST(Funnel, MaratosFullStepFailsArmijo) {
  FunnelStrategy s;
  s.initialize(5.28e-10, -0.707);
  // f rises from −0.707 to −0.207 while the model predicts a decrease
  const auto v = s.assess(trial(-0.707107, 5.28e-10, -0.207107, 0.5, 0.5));
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.rejection, Rejection::Armijo);
}

TEST(Funnel, HTypeShrinksWidth) {
  FunnelStrategy s;
  s.initialize(0.0, 0.0);  // τ = 100
  const auto t = trial(0.0, 50.0, 1.0, 10.0, -1.0);
  const auto v = s.assess(t);
  ASSERT_TRUE(v.accepted);
  EXPECT_EQ(v.type, StepType::HType);
  EXPECT_FALSE(v.switching);
  EXPECT_EQ(v.width_after, 55.0);
  s.commit(v, t);
  EXPECT_EQ(s.width(), 55.0);
  // h-type needs h_trial ≤ βτ
  const auto v2 = s.assess(trial(0.0, 50.0, 1.0, 54.9, -1.0));
  EXPECT_FALSE(v2.accepted);
}

TEST(Funnel, RestorationStepAndExit) {
  FunnelStrategy s;
  s.initialize(0.0, 0.0);  // τ = 100
  auto t = trial(5.0, 4.0, 5.0, 3.0, 0.0, 2.0);
  t.phase = Phase::Restoration;
  t.h_resto = 4.0;
  t.subproblem_feasible = false;
  auto v = s.assess(t);
  ASSERT_TRUE(v.accepted);
  EXPECT_EQ(v.type, StepType::RestorationStep);
  EXPECT_FALSE(v.leaves_restoration);
  EXPECT_EQ(v.width_after, 100.0);
  // insufficient decrease on h
  t.h_trial = 3.9999;
  EXPECT_FALSE(s.assess(t).accepted);
  // consistent linearization and h_trial ≤ β·min(τ, h_resto) leaves the phase
  t.subproblem_feasible = true;
  t.h_trial = 1.0;
  t.models.predicted_f = -1.0;
  v = s.assess(t);
  ASSERT_TRUE(v.accepted);
  EXPECT_TRUE(v.leaves_restoration);
  EXPECT_EQ(v.type, StepType::HType);
  EXPECT_EQ(v.width_after, 0.5 * 1.0 + 0.5 * 100.0);
}

TEST(Funnel, ZeroStepIsAccepted) {
  FunnelStrategy s;
  s.initialize(0.0, 0.0);
  auto t = trial(1.0, 0.0, 1.0, 0.0, 0.0);
  t.step_norm = 0.0;
  const auto v = s.assess(t);
  EXPECT_TRUE(v.accepted);
  EXPECT_EQ(v.type, StepType::KktZeroStep);
}

TEST(ProgressModels, CircleExample) {
  Iterate it;
  it.x = Vector::Zero(2);
  it.grad_f = Vector::Zero(2);
  it.c = Vector::Constant(1, -1.0);
  it.h = 1.0;
  it.jac_c = Matrix::Ones(2, 1);
  const Vector d = Vector::Constant(2, 0.5);
  const auto m = compute_progress_models(it, 2.0 * Matrix::Identity(2, 2), d);
  EXPECT_DOUBLE_EQ(m.predicted_f, -0.5);
  EXPECT_DOUBLE_EQ(m.predicted_h, 1.0);
  const auto zero = compute_progress_models(it, Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_EQ(zero.predicted_f, 0.0);
  EXPECT_EQ(zero.predicted_h, 0.0);
}

TEST(Filter, Acceptability) {
  FilterStrategy s;
  s.initialize(0.0, 0.0);  // h_max = 100
  EXPECT_TRUE(s.acceptable(1.0, 1e30));
  EXPECT_FALSE(s.acceptable(99.95, 0.0));
  s.add(1.0, 5.0);
  EXPECT_FALSE(s.acceptable(1.0, 5.0));
  EXPECT_TRUE(s.acceptable(0.5, 5.0));
  EXPECT_TRUE(s.acceptable(1.0, 4.0));
}

TEST(Filter, AddRemovesDominatedEntries) {
  FilterStrategy s;
  s.initialize(0.0, 0.0);
  s.add(3.0, 1.0);
  s.add(1.0, 3.0);
  s.add(2.0, 2.0);
  EXPECT_EQ(s.size(), 3u);
  s.add(0.5, 0.5);  // dominates everything
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.entries()[0].h, 0.5);
}

TEST(Filter, CapacityEvictsLargestH) {
  FilterParameters p;
  p.capacity = 50;
  FilterStrategy s(p);
  s.initialize(0.0, 0.0);
  for (int i = 0; i < 50; ++i) s.add(1.0 + i, 100.0 - i);
  ASSERT_EQ(s.size(), 50u);
  s.add(0.5, 200.0);
  EXPECT_EQ(s.size(), 50u);
  EXPECT_EQ(s.width(), 50.0);
  for (const auto& e : s.entries()) EXPECT_LT(e.h, 50.0);
}

TEST(Filter, HTypeCommitAddsCurrentPoint) {
  FilterStrategy s;
  s.initialize(0.0, 0.0);
  const auto t = trial(2.0, 10.0, 2.5, 5.0, -1.0);
  const auto v = s.assess(t);
  ASSERT_TRUE(v.accepted);
  EXPECT_EQ(v.type, StepType::HType);
  s.commit(v, t);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.entries()[0].h, 10.0);
  EXPECT_EQ(s.entries()[0].f, 2.0);
}

// Random add sequences keep the filter non-dominated, bounded and under h_max.
TEST(FilterProperty, RandomMutations) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  testkit::InvariantReport report;
  for (int run = 0; run < 50; ++run) {
    FilterParameters p;
    p.capacity = 1 + run % 10;
    FilterStrategy s(p);
    s.initialize(10.0 * u(rng), 0.0);
    for (int i = 0; i < 200; ++i) {
      const double h = s.width() * u(rng);
      const double f = 10.0 * u(rng) - 5.0;
      const double before = s.width();
      if (s.acceptable(h, f)) s.add(h, f);
      testkit::check_filter_state("run " + std::to_string(run), s.entries(), s.width(),
                                  p.capacity, report);
      if (s.width() > before) report.fail("run " + std::to_string(run), "h_max grew");
    }
  }
  EXPECT_EQ(report.violations, 0u) << (report.messages.empty() ? "" : report.messages[0]);
}

// Random accepted trials drive the funnel through the commit path; the width
// never grows and h-type steps contract it by θ.
TEST(FunnelProperty, RandomTrials) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FunnelParameters p;
  for (int run = 0; run < 50; ++run) {
    FunnelStrategy s(p);
    s.initialize(200.0 * u(rng), 0.0);
    double h = 0.5 * s.width();
    double f = 0.0;
    for (int i = 0; i < 200; ++i) {
      auto t = trial(f, h, f - u(rng) + 0.3, s.width() * u(rng) * 1.05, 2.0 * u(rng) - 0.5);
      const double tau = s.width();
      const auto v = s.assess(t);
      if (v.accepted) {
        EXPECT_LE(t.h_trial, tau);
        s.commit(v, t);
        EXPECT_LE(s.width(), tau);
        if (v.type == StepType::HType) {
          EXPECT_LE(s.width(), p.contraction() * tau);
          EXPECT_EQ(s.width(), (1.0 - p.kappa) * t.h_trial + p.kappa * tau);
        }
        if (v.type == StepType::FType) {
          EXPECT_GE(t.models.predicted_f, p.delta * h * h);
          EXPECT_GE(t.f_current - t.f_trial, p.sigma * t.models.predicted_f);
        }
        h = t.h_trial;
        f = t.f_trial;
      } else {
        EXPECT_EQ(s.width(), tau);
      }
    }
  }
}
