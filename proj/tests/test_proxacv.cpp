#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace acvkit;
using namespace acvkit::testing;

namespace {

FoldScheme loo(int n) { return make_folds(n, FoldKind::LeaveOneOut); }

}  // namespace

TEST(ProxACV, ZeroPenaltyIsANewtonStep) {
  const Dataset data = logistic_data(60, 3, 3, 2);
  const Model model = logistic_model(Regularizer::none());
  const FitResult f = fit_erm(model, data, full_weights(60), 0.0, SolverConfig{});
  const auto p = proxacv(model, data, f, loo(60), SolverConfig{});
  const auto a = acv(model, data, f, loo(60));
  for (int i = 0; i < 60; ++i) EXPECT_LE((p.estimators[i] - a.estimators[i]).norm(), 1e-10);
  EXPECT_NEAR(p.value, a.value, 1e-10);
}

TEST(ProxACV, StationaryLossWithoutPenaltyReturnsTheFit) {
  const Dataset data = Dataset::from_points(Mat::Constant(4, 2, 0.7));
  const Model model = quadratic_model(Regularizer::none());
  const FitResult f = fit_erm(model, data, full_weights(4), 0.0, SolverConfig{});
  const auto p = proxacv(model, data, f, loo(4), SolverConfig{});
  const auto q = proxacv_ij(model, data, f, loo(4), SolverConfig{});
  for (int i = 0; i < 4; ++i) {
    EXPECT_LE((p.estimators[i] - f.beta).norm(), 1e-15);
    EXPECT_LE((q.estimators[i] - f.beta).norm(), 1e-15);
  }
}

TEST(ProxACV, OneDimensionalLassoSoftThresholdsNewtonTarget) {
  const int n = 15;
  const Dataset data = gaussian_points(n, 1, 23, 0.6);
  const Model model = quadratic_model(Regularizer::l1());
  for (double lambda : {0.05, 0.3, 0.8}) {
    const FitResult f = fit_erm(model, data, full_weights(n), lambda, SolverConfig{});
    const auto p = proxacv(model, data, f, loo(n), SolverConfig{});
    const double H = (n - 1.0) / n;
    for (int i = 0; i < n; ++i) {
      // loss gradient on P_{-i}: H beta_hat - (sum_{j != i} z_j)/n
      const double g = H * f.beta(0) - (data.X.col(0).sum() - data.X(i, 0)) / n;
      const double target = f.beta(0) - g / H;
      const double st = std::copysign(std::max(std::abs(target) - lambda / H, 0.0), target);
      EXPECT_NEAR(p.estimators[i](0), st, 1e-12);
      const double oracle = grid_minimize(
          [&](double x) { return 0.5 * H * (x - target) * (x - target) + lambda * std::abs(x); }, -4, 4);
      EXPECT_NEAR(p.estimators[i](0), oracle, 1e-7);
    }
  }
}

TEST(ProxACV, QuadraticLassoIsExact) {
  const Dataset data = gaussian_points(30, 2, 3, 0.4);
  const Model model = quadratic_model(Regularizer::l1());
  for (double lambda : log_grid(1e-3, 1.0, 8)) {
    const FitResult f = fit_erm(model, data, full_weights(30), lambda, SolverConfig{});
    const CVResult cv = exact_cv(model, data, lambda, loo(30), SolverConfig{}, &f);
    EXPECT_NEAR(proxacv(model, data, f, loo(30), SolverConfig{}).value, cv.value, 1e-10) << lambda;
    TaylorOptions t;
    EXPECT_NEAR(proxacv_p(model, data, f, loo(30), t, SolverConfig{}).value, cv.value, 1e-10);
  }
}

TEST(ProxACV, Prop7EqualsExactCV) {
  for (int n : {16, 64}) {
    CaseParams cp;
    cp.n = n;
    const CounterexampleInstance ce = build(Case::Prop7, cp);
    for (double lambda : ce.grid) {
      const FitResult f = fit_erm(ce.model, ce.data, full_weights(n), lambda, SolverConfig{});
      const CVResult cv = exact_cv(ce.model, ce.data, lambda, loo(n), SolverConfig{}, &f);
      EXPECT_NEAR(proxacv(ce.model, ce.data, f, loo(n), SolverConfig{}).value, cv.value, 1e-12);
    }
  }
}

TEST(ProxACV, IJPerEstimatorBound) {
  const Dataset data = logistic_data(150, 5, 3, 7);
  const Model model = logistic_model(Regularizer::l1());
  const int n = data.n();
  for (double lambda : {2e-3, 0.02, 0.1}) {
    const FitResult f = fit_erm(model, data, full_weights(n), lambda, SolverConfig{});
    const std::vector<FitResult> fits{f};
    const CVResult cv = exact_cv(model, data, lambda, loo(n), SolverConfig{}, &f);
    const std::vector<CVResult> cvs{cv};
    const ConstantSet cs = analytic_constants(model, data, {lambda}, fits, loo(n), SolverConfig{}, &cvs);
    const auto p = proxacv(model, data, f, loo(n), SolverConfig{});
    const auto q = proxacv_ij(model, data, f, loo(n), SolverConfig{});
    const double c = cs.c_ell;
    for (int i = 0; i < n; ++i) {
      const double hn = model.loss->hessian(data, i, f.beta).norm();
      const double gn = model.loss->gradient(data, i, f.beta).norm();
      EXPECT_LE((q.estimators[i] - p.estimators[i]).norm(), hn * gn / (c * c * n * n) + 1e-9) << i;
    }
  }
}

TEST(ProxACVp, SecondOrderUnregularizedIsProxACV) {
  const Dataset data = logistic_data(60, 4, 2, 3);
  const Model model = logistic_model(Regularizer::l1());
  const FitResult f = fit_erm(model, data, full_weights(60), 0.01, SolverConfig{});
  TaylorOptions t;
  t.p = 2;
  const auto a = proxacv(model, data, f, loo(60), SolverConfig{});
  const auto b = proxacv_p(model, data, f, loo(60), t, SolverConfig{});
  for (int i = 0; i < 60; ++i) EXPECT_LE((a.estimators[i] - b.estimators[i]).norm(), 1e-11);
}

TEST(ProxACVp, ThirdOrderDecaysFasterThanSecond) {
  ExperimentConfig cfg = parse_config(R"({
    "seed": 11,
    "instance": {"type": "synthetic", "features": 5, "nonzero": 3},
    "model": {"loss": "logistic", "regularizer": {"kind": "l1"}},
    "lambda_grid": {"min": 1e-2, "max": 1e0, "count": 20},
    "scaling": {"n": [50, 100, 200], "pairs": ["proxacv-cv", "proxacv_p3-cv"]}
  })");
  const ScalingReport rep = scaling_study(cfg, Exec::Parallel);
  EXPECT_LT(rep.slope[1], rep.slope[0]) << rep.slopes_csv;
}

TEST(ProxACV, SingularHessianNeedsOptIn) {
  // more parameters than points: the loss Hessian is singular
  const Dataset data = logistic_data(20, 30, 5, 4);
  const Model model = logistic_model(Regularizer::l1());
  const FitResult f = fit_erm(model, data, full_weights(20), 0.05, SolverConfig{});
  EXPECT_THROW(proxacv(model, data, f, loo(20), SolverConfig{}), Error);
  ProxOptions opts;
  opts.allow_singular_hessian = true;
  const auto p = proxacv(model, data, f, loo(20), SolverConfig{}, opts);
  EXPECT_TRUE(std::isfinite(p.value));
}

TEST(ProxACV, SerialAndParallelAreBitwiseEqual) {
  const Dataset data = logistic_data(60, 5, 3, 5);
  const Model model = logistic_model(Regularizer::l1());
  const FitResult f = fit_erm(model, data, full_weights(60), 0.01, SolverConfig{});
  const auto a = proxacv(model, data, f, loo(60), SolverConfig{}, {}, Exec::Serial);
  const auto b = proxacv(model, data, f, loo(60), SolverConfig{}, {}, Exec::Parallel);
  EXPECT_EQ(a.value, b.value);
  for (int i = 0; i < 60; ++i) EXPECT_TRUE(a.estimators[i] == b.estimators[i]);
}
