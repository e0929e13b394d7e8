#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace acvkit;
using namespace acvkit::testing;

namespace {

FoldScheme loo(int n) { return make_folds(n, FoldKind::LeaveOneOut); }

}  // namespace

TEST(ACV, ZeroGradientsReturnTheFit) {
  const Dataset data = Dataset::from_points(Mat::Constant(5, 2, -0.3));
  const Model model = quadratic_model(Regularizer::ridge());
  const FitResult f = fit_erm(model, data, full_weights(5), 0.0, SolverConfig{});
  const auto a = acv(model, data, f, loo(5));
  const auto ij = acv_ij(model, data, f, loo(5));
  for (int i = 0; i < 5; ++i) {
    EXPECT_LE((a.estimators[i] - f.beta).norm(), 1e-15);
    EXPECT_LE((ij.estimators[i] - f.beta).norm(), 1e-15);
  }
  EXPECT_NEAR(a.value, model.loss->value(data, full_weights(5), f.beta), 1e-15);
}

TEST(ACV, OneDimensionalHalfRidgeHandFormulas) {
  const int n = 9;
  const Dataset data = gaussian_points(n, 1, 5, 0.3);
  const Model model = quadratic_model(Regularizer::ridge(0.5));
  for (double lambda : {0.0, 0.4, 3.0}) {
    const FitResult f = fit_erm(model, data, full_weights(n), lambda, SolverConfig{});
    const double b = f.beta(0);
    const auto a = acv(model, data, f, loo(n));
    const auto ij = acv_ij(model, data, f, loo(n));
    for (int i = 0; i < n; ++i) {
      const double zi = data.X(i, 0);
      EXPECT_NEAR(a.estimators[i](0), b + (b - zi) / (n * ((n - 1.0) / n + lambda)), 1e-12);
      EXPECT_NEAR(ij.estimators[i](0), b + (b - zi) / (n * (1.0 + lambda)), 1e-12);
    }
  }
}

TEST(ACV, QuadraticRidgeIsExact) {
  for (int d : {1, 3}) {
    const Dataset data = gaussian_points(40, d, 9 + d, 0.5);
    const Model model = quadratic_model(Regularizer::ridge());
    for (double lambda : log_grid(1e-4, 1e2, 12)) {
      const FitResult f = fit_erm(model, data, full_weights(40), lambda, SolverConfig{});
      const CVResult cv = exact_cv(model, data, lambda, loo(40), SolverConfig{}, &f);
      const auto a = acv(model, data, f, loo(40));
      EXPECT_NEAR(a.value, cv.value, 1e-12) << lambda;
    }
  }
}

TEST(ACV, SerialAndParallelAreBitwiseEqual) {
  const Dataset data = logistic_data(60, 4, 4, 1);
  const Model model = logistic_model(Regularizer::ridge());
  const FitResult f = fit_erm(model, data, full_weights(60), 0.02, SolverConfig{});
  TaylorOptions t3;
  for (int which = 0; which < 3; ++which) {
    auto run = [&](Exec e) {
      if (which == 0) return acv(model, data, f, loo(60), e);
      if (which == 1) return acv_ij(model, data, f, loo(60), e);
      return acv_p(model, data, f, loo(60), t3, e);
    };
    const auto s = run(Exec::Serial), p = run(Exec::Parallel);
    EXPECT_EQ(s.value, p.value);
    for (int i = 0; i < 60; ++i) EXPECT_TRUE(s.estimators[i] == p.estimators[i]);
  }
}

TEST(ACV, IJPerEstimatorBound) {
  const Dataset data = logistic_data(120, 4, 4, 6);
  const Model model = logistic_model(Regularizer::ridge());
  const int n = data.n();
  for (double lambda : {1e-3, 0.05, 1.0}) {
    const FitResult f = fit_erm(model, data, full_weights(n), lambda, SolverConfig{});
    const std::vector<FitResult> fits{f};
    const CVResult cv = exact_cv(model, data, lambda, loo(n), SolverConfig{}, &f);
    const std::vector<CVResult> cvs{cv};
    const ConstantSet cs = analytic_constants(model, data, {lambda}, fits, loo(n), SolverConfig{}, &cvs);
    const auto a = acv(model, data, f, loo(n));
    const auto ij = acv_ij(model, data, f, loo(n));
    for (int i = 0; i < n; ++i) {
      const double hn = model.loss->hessian(data, i, f.beta).norm();
      const double gn = model.loss->gradient(data, i, f.beta).norm();
      const double c = cs.c_m;
      EXPECT_LE((ij.estimators[i] - a.estimators[i]).norm(), hn * gn / (c * c * n * n)) << i;
    }
  }
}

TEST(ACVp, SecondOrderUnregularizedIsACV) {
  const Dataset data = logistic_data(50, 3, 3, 4);
  const Model model = logistic_model(Regularizer::ridge());
  const FitResult f = fit_erm(model, data, full_weights(50), 0.01, SolverConfig{});
  TaylorOptions t;
  t.p = 2;
  const auto a = acv(model, data, f, loo(50));
  const auto p = acv_p(model, data, f, loo(50), t);
  EXPECT_EQ(p.method, "acv_p2");
  for (int i = 0; i < 50; ++i) EXPECT_LE((a.estimators[i] - p.estimators[i]).norm(), 1e-12);
  EXPECT_NEAR(a.value, p.value, 1e-12);
}

TEST(ACVp, ThirdOrderOnQuadraticIsExact) {
  const Dataset data = gaussian_points(30, 2, 8);
  const Model model = quadratic_model(Regularizer::ridge());
  const FitResult f = fit_erm(model, data, full_weights(30), 0.2, SolverConfig{});
  const CVResult cv = exact_cv(model, data, 0.2, loo(30), SolverConfig{}, &f);
  TaylorOptions t;
  for (bool reg : {false, true}) {
    t.regularized = reg;
    EXPECT_NEAR(acv_p(model, data, f, loo(30), t).value, cv.value, 1e-12);
  }
}

TEST(ACVp, ThirdOrderRegularizedStaysCloseToCV) {
  const Dataset data = logistic_data(80, 3, 3, 12);
  const Model model = logistic_model(Regularizer::ridge());
  const FitResult f = fit_erm(model, data, full_weights(80), 0.01, SolverConfig{});
  const CVResult cv = exact_cv(model, data, 0.01, loo(80), SolverConfig{}, &f);
  TaylorOptions t;
  t.regularized = true;
  const auto r = acv_p(model, data, f, loo(80), t);
  EXPECT_EQ(r.method, "acv_p3_reg");
  EXPECT_LE(std::abs(r.value - cv.value), 0.05 * cv.value);
}

TEST(ACVp, ThirdOrderDecaysFasterThanSecond) {
  ExperimentConfig cfg = parse_config(R"({
    "seed": 11,
    "instance": {"type": "synthetic", "features": 5, "nonzero": 5},
    "model": {"loss": "logistic", "regularizer": {"kind": "ridge", "scale": 1.0}},
    "lambda_grid": {"min": 1e-2, "max": 1e2, "count": 20},
    "scaling": {"n": [50, 100, 200], "pairs": ["acv-cv", "acv_p3-cv"]}
  })");
  const ScalingReport rep = scaling_study(cfg, Exec::Parallel);
  RecordProperty("slope_acv", std::to_string(rep.slope[0]));
  RecordProperty("slope_acv_p3", std::to_string(rep.slope[1]));
  EXPECT_LE(rep.slope[1], -2.5) << rep.slopes_csv;
  EXPECT_LT(rep.slope[1], rep.slope[0]) << rep.slopes_csv;
}

TEST(SupportRestricted, Prop5EstimatorsVanish) {
  const CounterexampleInstance ce = build(Case::Prop5, CaseParams{});
  const int n = ce.data.n();
  const FitResult f = fit_erm(ce.model, ce.data, full_weights(n), ce.zbar, SolverConfig{});
  EXPECT_EQ(f.beta(0), 0.0);
  const auto ij = acv_support_restricted(ce.model, ce.data, f, loo(n), true);
  for (const Vec& b : ij.estimators) EXPECT_EQ(b(0), 0.0);
  EXPECT_NEAR(ij.value, (ce.zbar * ce.zbar + 1) / 2, 1e-14);
}

TEST(SupportRestricted, FullSupportMatchesIJ) {
  const Dataset data = gaussian_points(20, 3, 4, 2.0);
  const Model model = quadratic_model(Regularizer::ridge());
  const FitResult f = fit_erm(model, data, full_weights(20), 0.1, SolverConfig{});
  ASSERT_GT(f.beta.cwiseAbs().minCoeff(), 0.0);
  const auto sr = acv_support_restricted(model, data, f, loo(20), true);
  const auto ij = acv_ij(model, data, f, loo(20));
  for (int i = 0; i < 20; ++i) EXPECT_LE((sr.estimators[i] - ij.estimators[i]).norm(), 1e-12);
  const auto sr_acv = acv_support_restricted(model, data, f, loo(20), false);
  const auto a = acv(model, data, f, loo(20));
  EXPECT_NEAR(sr_acv.value, a.value, 1e-12);
}

TEST(SupportRestricted, OneDimensionalLassoIJStep) {
  const int n = 12;
  const Dataset data = gaussian_points(n, 1, 19, 1.5);
  const double zbar = data.X.col(0).mean();
  const Model model = quadratic_model(Regularizer::l1());
  const double lambda = 0.5;
  ASSERT_GT(zbar, lambda);
  const FitResult f = fit_erm(model, data, full_weights(n), lambda, SolverConfig{});
  const auto ij = acv_support_restricted(model, data, f, loo(n), true);
  for (int i = 0; i < n; ++i) {
    const double eps = data.X(i, 0) - zbar;
    EXPECT_NEAR(ij.estimators[i](0), zbar - lambda - (eps + lambda) / n, 1e-12);
  }
}
