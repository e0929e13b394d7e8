#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace acvkit;
using namespace acvkit::testing;

namespace {

FoldScheme loo(int n) { return make_folds(n, FoldKind::LeaveOneOut); }

ConstantSet toy_constants() {
  ConstantSet cs;
  cs.c_ell = 1.0;
  cs.c_pi = 1.0;
  cs.lambda_pi = 0.0;
  cs.c_m = 1.0;
  cs.C_ell_3 = 2.0;
  cs.C_pi_3 = 0.0;
  cs.grid = {0.1, 1.0, 10.0};
  return cs;
}

}  // namespace

TEST(Moments, VanishForZeroGradients) {
  const Dataset data = Dataset::from_points(Mat::Zero(5, 2));
  const Model model = quadratic_model(Regularizer::ridge());
  const auto fits = fit_path(model, data, full_weights(5), {0.0, 1.0}, SolverConfig{});
  const ConstantSet cs = analytic_constants(model, data, {0.0, 1.0}, fits, loo(5), SolverConfig{});
  for (int s = 0; s <= 3; ++s)
    for (int r = 1; r <= 4; ++r) EXPECT_EQ(moment_bound(model, data, s, r, fits, cs).value, 0.0);
}

TEST(Moments, OneDimensionalHandValue) {
  Mat Z(2, 1);
  Z << -1.0, 1.0;
  const Dataset data = Dataset::from_points(Z);
  const Model model = quadratic_model(Regularizer::ridge());
  const auto fits = fit_path(model, data, full_weights(2), {0.0}, SolverConfig{});
  const ConstantSet cs = analytic_constants(model, data, {0.0}, fits, loo(2), SolverConfig{});
  const MomentEstimate m = moment_bound(model, data, 0, 2, fits, cs);
  EXPECT_DOUBLE_EQ(m.value, 1.0);
  EXPECT_EQ(m.source, "grid-sup");
}

TEST(Moments, GridSupremumBelowSufficientBound) {
  const Dataset data = logistic_data(100, 4, 4, 13);
  const Model model = logistic_model(Regularizer::ridge());
  const auto grid = log_grid(1e-3, 1e2, 15);
  const auto fits = fit_path(model, data, full_weights(100), grid, SolverConfig{});
  const ConstantSet cs = analytic_constants(model, data, grid, fits, loo(100), SolverConfig{});
  for (auto [s, r] : std::vector<std::pair<int, int>>{{0, 2}, {1, 2}, {0, 3}, {1, 3}, {1, 4}, {3, 2}}) {
    const double sup = moment_bound(model, data, s, r, fits, cs).value;
    const MomentEstimate suff = moment_sufficient_bound(model, data, s, r, cs);
    EXPECT_LE(sup, suff.value) << s << "," << r;
    EXPECT_EQ(suff.source, "sufficient");
  }
}

TEST(Constants, QuadraticHalfRidgeCurvatureIsExact) {
  for (int n : {5, 20}) {
    const Dataset data = gaussian_points(n, 1, 2);
    const Model model = quadratic_model(Regularizer::ridge(0.5));
    const auto fits = fit_path(model, data, full_weights(n), {0.0}, SolverConfig{});
    const ConstantSet cs = analytic_constants(model, data, {0.0}, fits, loo(n), SolverConfig{});
    EXPECT_DOUBLE_EQ(cs.c_m, (n - 1.0) / n);
    EXPECT_EQ(cs.c_m_source, "analytic");
    EXPECT_EQ(cs.C_ell_3, 0.0);
  }
}

TEST(Kappa, VanishesForQuadraticRidge) {
  const Dataset data = gaussian_points(10, 2, 3);
  const Model model = quadratic_model(Regularizer::ridge());
  const auto grid = log_grid(1e-2, 1e2, 5);
  const auto fits = fit_path(model, data, full_weights(10), grid, SolverConfig{});
  const ConstantSet cs = analytic_constants(model, data, grid, fits, loo(10), SolverConfig{});
  EXPECT_EQ(kappa(2, cs, grid), 0.0);
}

TEST(Kappa, MonotoneRatioPeaksAtZero) {
  const ConstantSet cs = toy_constants();
  EXPECT_DOUBLE_EQ(kappa_ratio(2, cs, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(kappa(2, cs, cs.grid), 1.0);
}

TEST(Kappa, LogisticMatchesDenseGrid) {
  const Dataset data = logistic_data(80, 3, 3, 4);
  const Model model = logistic_model(Regularizer::ridge());
  const auto grid = log_grid(1e-3, 1e2, 10);
  const auto fits = fit_path(model, data, full_weights(80), grid, SolverConfig{});
  const ConstantSet cs = analytic_constants(model, data, grid, fits, loo(80), SolverConfig{});
  ASSERT_TRUE(std::isfinite(cs.C_ell_3));
  double dense = 0;
  for (int k = 0; k <= 100000; ++k) {
    const double lambda = 1e-3 * k;
    dense = std::max(dense, (cs.C_ell_3 + lambda * cs.C_pi_3) / (2 * (cs.c_ell + lambda * cs.c_pi)));
  }
  const double k2 = kappa(2, cs, grid);
  EXPECT_TRUE(std::isfinite(k2));
  EXPECT_NEAR(k2, dense, 1e-6 * dense);
}

TEST(BoundFormulas, PluggedValues) {
  // 1/n^2 + 1/n^3 + 1/(2 n^4) at n = 100
  EXPECT_NEAR(thm1_bound(1, 1, 1, 1, 1, 100), 1e-4 + 1e-6 + 0.5e-8, 1e-18);
  EXPECT_EQ(thm1_bound(1, 0, 0, 0, 1, 100), 0.0);
  EXPECT_EQ(thm2_bound(0, 0, 0, 1, 100), 0.0);
  EXPECT_EQ(thm6_bound(0.0, 3, 2, 1, 0.5, 50), 0.0);
  EXPECT_NEAR(thm4_rhs(1, 0, 0, 1, 1, 100), 0.08, 1e-16);
  EXPECT_EQ(thm4_rhs(0, 0, 0, 1, 1, 100), 0.0);
  EXPECT_EQ(thm8_rhs(0, 0, 0, 1, 100), 0.0);
  EXPECT_NEAR(thm2_bound(1, 1, 1, 1, 10), 1e-2 + 1e-3 + 0.5e-4, 1e-17);
}

TEST(BoundFormulas, InfiniteKappaTimesZeroMomentIsZero) {
  EXPECT_EQ(thm1_bound(kInfinity, 0, 0, 0, 1, 10), 0.0);
  EXPECT_TRUE(std::isinf(thm1_bound(kInfinity, 1, 0, 0, 1, 10)));
}

TEST(BoundFormulas, NonPositiveCurvatureThrows) {
  EXPECT_THROW(thm1_bound(1, 1, 1, 1, 0.0, 10), Error);
  EXPECT_THROW(thm4_rhs(1, 1, 1, 1, -1, 10), Error);
}

TEST(OptimizerComparison, IdenticalObjectivesAreTight) {
  std::mt19937_64 rng(1);
  const QuadraticObjective q = random_quadratic(3, rng);
  EXPECT_NEAR(errorbound_residual(q, q), 0.0, 1e-15);
  EXPECT_NEAR(growth_residual(q, q), 0.0, 1e-15);
}

TEST(OptimizerComparison, OneDimensionalClosedForm) {
  // phi1 = (x - 1)^2, phi2 = 2 (x + 1)^2: both inequalities hold with equality
  QuadraticObjective p1{Mat::Constant(1, 1, 2.0), Vec::Constant(1, 1.0), 0.0};
  QuadraticObjective p2{Mat::Constant(1, 1, 4.0), Vec::Constant(1, -1.0), 0.0};
  EXPECT_DOUBLE_EQ(p1.value(Vec::Constant(1, 0.0)), 1.0);
  EXPECT_DOUBLE_EQ(p2.value(Vec::Constant(1, 0.0)), 2.0);
  EXPECT_NEAR(errorbound_residual(p1, p2), 0.0, 1e-14);
  EXPECT_NEAR(growth_residual(p1, p2), 0.0, 1e-14);
}

TEST(OptimizerComparison, RandomPairsSatisfyBothForms) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int k = 0; k < 300; ++k) {
    const int d = dim(rng);
    const QuadraticObjective a = random_quadratic(d, rng), b = random_quadratic(d, rng);
    EXPECT_LE(errorbound_residual(a, b), 1e-12);
    EXPECT_LE(growth_residual(a, b), 1e-12);
  }
}

TEST(TaylorComparison, RandomInstances) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 40; ++k) {
    const int d = 1 + k % 4;
    const SoftplusInstance inst = random_softplus(d, rng);
    const Vec w = inst.c + random_vec(d, rng, 0.5);
    EXPECT_LE(taylor_residual(inst, w, false), 1e-10) << k;
    EXPECT_LE(taylor_residual(inst, w, true), 1e-10) << k;
  }
}

TEST(ProxNewtonComparison, RandomInstances) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 40; ++k) {
    const int d = 1 + k % 5;
    const Mat H = random_pd(d, rng), Ht = random_pd(d, rng);
    const Vec beta = random_vec(d, rng), g = random_vec(d, rng);
    EXPECT_LE(proxnewton_residual(beta, g, H, Ht, Regularizer::l1(), 0.3, SolverConfig{}), 1e-10);
  }
}

TEST(Certify, QuadraticRidgePasses) {
  const Dataset data = gaussian_points(40, 2, 6, 0.5);
  const Model model = quadratic_model(Regularizer::ridge());
  CurveOptions co;
  co.methods = {"cv", "acv", "acv_ij"};
  co.scheme = loo(40);
  const auto grid = log_grid(1e-3, 1e2, 10);
  const Curves cur = compute_curves(model, data, grid, co);
  CertifyOptions opts;
  opts.theorems = {"thm1", "thm2", "thm4"};
  const BoundCertificate cert = certify(model, data, cur, co, opts);
  EXPECT_TRUE(cert.all_pass);
  EXPECT_TRUE(verdicts_consistent(cert));
  for (const auto& row : cert.rows) {
    if (row.theorem == "thm1") {
      EXPECT_LE(row.gap, 1e-10);
      EXPECT_EQ(row.bound, 0.0);
    }
    EXPECT_GE(row.bound, 0.0);
  }
  const std::string json = certificate_json(cert);
  EXPECT_NE(json.find("\"certificate_version\": 1"), std::string::npos);
  EXPECT_EQ(certificate_csv(cert).rfind("lambda,method,gap,bound,pass\n", 0), 0u);
}

TEST(Certify, GridArgminBreaksTiesTowardSmallestLambda) {
  EXPECT_EQ(grid_argmin({0.1, 0.2, 0.3}, {1.0, 0.5, 0.5}), 1);
  EXPECT_EQ(grid_argmin({0.1, 0.2, 0.3}, {0.5, 0.5, 0.5}), 0);
}

TEST(Certify, MethodsForTheorems) {
  const auto m = methods_for_theorems({"thm6", "thm7"});
  EXPECT_NE(std::find(m.begin(), m.end(), "proxacv_ij"), m.end());
  EXPECT_NE(std::find(m.begin(), m.end(), "cv"), m.end());
}
