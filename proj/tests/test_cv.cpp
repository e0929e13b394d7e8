#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace acvkit;
using namespace acvkit::testing;

TEST(Folds, LeaveOneOut) {
  const FoldScheme s = make_folds(4, FoldKind::LeaveOneOut);
  ASSERT_EQ(s.size(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(s.held_out[i], std::vector<int>{i});
}

TEST(Folds, SequentialKFold) {
  const FoldScheme s = make_folds(4, FoldKind::KFold, 2);
  ASSERT_EQ(s.size(), 2);
  EXPECT_EQ(s.held_out[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(s.held_out[1], (std::vector<int>{2, 3}));
  const FoldScheme r = make_folds(7, FoldKind::KFold, 3);
  EXPECT_EQ(r.held_out[2], (std::vector<int>{4, 5, 6}));
}

TEST(Folds, ShuffledKFoldIsAPartition) {
  const FoldScheme s = make_folds(11, FoldKind::KFold, 3, 42);
  std::vector<int> seen;
  for (const auto& f : s.held_out) seen.insert(seen.end(), f.begin(), f.end());
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 11; ++i) EXPECT_EQ(seen[i], i);
  EXPECT_EQ(make_folds(11, FoldKind::KFold, 3, 42).held_out, s.held_out);
}

TEST(Folds, LeavePairOut) {
  const FoldScheme s = make_folds(3, FoldKind::LeavePairOut);
  ASSERT_EQ(s.size(), 3);
  EXPECT_EQ(s.held_out[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(s.held_out[1], (std::vector<int>{0, 2}));
  EXPECT_EQ(s.held_out[2], (std::vector<int>{1, 2}));
}

TEST(Folds, InvalidArguments) {
  EXPECT_THROW(make_folds(4, FoldKind::KFold, 5), Error);
  EXPECT_THROW(make_folds(4, FoldKind::KFold, 1), Error);
}

TEST(Weights, HoldoutIsNotRenormalized) {
  const Vec w = holdout_weights(4, {2});
  EXPECT_EQ(w(2), 0.0);
  EXPECT_EQ(w(0), 0.25);
  EXPECT_DOUBLE_EQ(w.sum(), 0.75);
}

TEST(CV, IdenticalPointsGiveZero) {
  Mat Z = Mat::Constant(6, 2, 0.4);
  const Dataset data = Dataset::from_points(Z);
  const Model model = quadratic_model(Regularizer::ridge());
  const CVResult cv = exact_cv(model, data, 0.0, make_folds(6, FoldKind::LeaveOneOut), SolverConfig{});
  EXPECT_NEAR(cv.value, 0.0, 1e-24);
  for (const Vec& b : cv.estimators) EXPECT_LE((b - Z.row(0).transpose()).norm(), 1e-12);
}

TEST(CV, OneDimensionalRidgeMatchesPerFoldGridOracle) {
  const Dataset data = gaussian_points(5, 1, 77, 0.5);
  const Model model = quadratic_model(Regularizer::ridge(0.5));
  const int n = 5;
  for (double lambda : {0.0, 0.3, 2.0}) {
    const CVResult cv = exact_cv(model, data, lambda, make_folds(n, FoldKind::LeaveOneOut), SolverConfig{});
    double oracle_cv = 0, closed_cv = 0;
    for (int i = 0; i < n; ++i) {
      const Vec w = holdout_weights(n, {i});
      const double b = grid_minimize(
          [&](double x) { return objective_value(model, data, w, Vec::Constant(1, x), lambda); }, -5, 5);
      // closed form: sum_{j != i} z_j / n divided by (n-1)/n + lambda
      const double closed = (data.X.col(0).sum() - data.X(i, 0)) / n / ((n - 1.0) / n + lambda);
      EXPECT_NEAR(cv.estimators[i](0), closed, 1e-12);
      EXPECT_NEAR(cv.estimators[i](0), b, 1e-7);
      oracle_cv += 0.5 * (b - data.X(i, 0)) * (b - data.X(i, 0)) / n;
      closed_cv += 0.5 * (closed - data.X(i, 0)) * (closed - data.X(i, 0)) / n;
    }
    EXPECT_NEAR(cv.value, closed_cv, 1e-12);
    EXPECT_NEAR(cv.value, oracle_cv, 1e-7);
  }
}

TEST(CV, Prop5LeaveOneOutFitsAreClippedShifts) {
  const CounterexampleInstance ce = build(Case::Prop5, CaseParams{});
  const int n = ce.data.n();
  SolverConfig cfg;
  cfg.tol_fit = 1e-14;
  const CVResult cv = exact_cv(ce.model, ce.data, ce.zbar, make_folds(n, FoldKind::LeaveOneOut), cfg);
  for (int i = 0; i < n; ++i) {
    EXPECT_NEAR(cv.estimators[i](0), std::max(-ce.data.X(i, 0) / (n - 1), 0.0), 1e-12) << i;
  }
}

TEST(CV, KFoldHeldOutLossIsFoldMean) {
  const Dataset data = gaussian_points(6, 1, 3);
  const Model model = quadratic_model(Regularizer::ridge());
  const FoldScheme s = make_folds(6, FoldKind::KFold, 3);
  const CVResult cv = exact_cv(model, data, 0.1, s, SolverConfig{});
  for (int f = 0; f < 3; ++f) {
    double m = 0;
    for (int i : s.held_out[f]) m += model.loss->value(data, i, cv.estimators[f]);
    EXPECT_NEAR(cv.heldout_loss[f], m / 2, 1e-15);
  }
  EXPECT_DOUBLE_EQ(cv.value, fold_average(cv.heldout_loss));
}

TEST(CV, SerialAndParallelAreBitwiseEqual) {
  const Dataset data = logistic_data(50, 4, 4, 8);
  const Model model = logistic_model(Regularizer::ridge());
  const FoldScheme s = make_folds(50, FoldKind::LeaveOneOut);
  const FitResult full = fit_erm(model, data, full_weights(50), 0.05, SolverConfig{});
  const CVResult a = exact_cv(model, data, 0.05, s, SolverConfig{}, &full, Exec::Serial);
  const CVResult b = exact_cv(model, data, 0.05, s, SolverConfig{}, &full, Exec::Parallel);
  EXPECT_EQ(a.value, b.value);
  for (int i = 0; i < s.size(); ++i) EXPECT_TRUE(a.estimators[i] == b.estimators[i]);
}

TEST(CV, LogisticFoldFitsAreStationary) {
  const Dataset data = logistic_data(40, 3, 3, 2);
  const Model model = logistic_model(Regularizer::ridge());
  const CVResult cv = exact_cv(model, data, 0.01, make_folds(40, FoldKind::LeaveOneOut), SolverConfig{});
  for (int i = 0; i < 40; ++i) {
    const ObjectiveEval e = evaluate(model, data, holdout_weights(40, {i}), cv.estimators[i], 0.01);
    EXPECT_LE(e.gradient.norm(), 1e-10);
  }
}
