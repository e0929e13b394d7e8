#include "acvkit/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace acvkit {

std::string case_name(Case c) {
  switch (c) {
    case Case::Prop5: return "prop5";
    case Case::Prop6: return "prop6";
    case Case::Prop7: return "prop7";
    case Case::Fig1a: return "fig1a";
    case Case::Fig1b: return "fig1b";
  }
  return "unknown";
}

Case parse_case(const std::string& name) {
  for (Case c : {Case::Prop5, Case::Prop6, Case::Prop7, Case::Fig1a, Case::Fig1b}) {
    if (case_name(c) == name) return c;
  }
  throw Error("unknown counterexample '" + name + "' (expected prop5, prop6, prop7, fig1a, fig1b)");
}

void prop5_atoms(double& a, double& b) {
  const double s = 2.0 * std::sqrt(2.0 / std::numbers::pi);
  const double p = (s * s - 2.0) / 2.0;
  const double disc = std::sqrt(s * s - 4.0 * p);
  a = (s + disc) / 2.0;
  b = (s - disc) / 2.0;
}

Mat moment_matched_points(int n, const Vec& mean, std::uint64_t seed) {
  const Eigen::Index d = mean.size();
  if (n <= d) throw Error("moment matching needs n > d");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat X(n, d);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = normal(rng);
  }
  X.rowwise() -= X.colwise().mean();
  const Mat C = X.transpose() * X / n;
  const Eigen::LLT<Mat> llt(C);
  // Rows x -> L^{-1} x, i.e. X <- X L^{-T}.
  const Mat W = llt.matrixL().solve(X.transpose()).transpose();
  return W.rowwise() + mean.transpose();
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0) || !(hi > lo) || n < 2) throw Error("log_grid needs 0 < lo < hi and n >= 2");
  std::vector<double> g(static_cast<size_t>(n));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < n; ++k) g[static_cast<size_t>(k)] = std::pow(10.0, a + (b - a) * k / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

namespace {

void require_multiple_of_4(int n, const char* what) {
  if (n < 4 || n % 4 != 0) {
    throw Error(std::string(what) + " needs n divisible by 4, got " + std::to_string(n));
  }
}

Mat four_atoms(int n, double center, double a, double b) {
  Mat Z(n, 1);
  const double atoms[4] = {center - a, center - b, center + b, center + a};
  for (int i = 0; i < n; ++i) Z(i, 0) = atoms[i / (n / 4)];
  return Z;
}

// Grid of the given size around x (log spaced over two decades) with x itself
// inserted exactly.
std::vector<double> grid_around(double x, int count) {
  std::vector<double> g = log_grid(x / 10.0, x * 10.0, count);
  g.push_back(x);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace

CounterexampleInstance build(Case c, const CaseParams& p) {
  CounterexampleInstance inst;
  inst.kind = c;
  inst.name = case_name(c);
  const int n = p.n;
  switch (c) {
    case Case::Prop5: {
      require_multiple_of_4(n, "prop5");
      prop5_atoms(inst.a, inst.b);
      inst.zbar = std::sqrt(2.0 / n);
      inst.data = Dataset::from_points(four_atoms(n, inst.zbar, inst.a, inst.b));
      inst.model = {std::make_shared<QuadraticLoss>(), Regularizer::l1()};
      inst.lambda_star = inst.zbar;
      inst.grid = grid_around(inst.zbar, 41);
      break;
    }
    case Case::Prop6: {
      require_multiple_of_4(n, "prop6");
      if (!(p.delta > 0)) throw Error("prop6 needs delta > 0");
      prop5_atoms(inst.a, inst.b);
      inst.zbar = 2.0 * p.delta;
      inst.data = Dataset::from_points(four_atoms(n, inst.zbar, inst.a, inst.b));
      inst.model = {std::make_shared<QuadraticLoss>(), Regularizer::patched_lasso(p.delta)};
      inst.lambda_star = p.delta;
      inst.grid = grid_around(p.delta, 41);
      break;
    }
    case Case::Prop7: {
      if (n < 4 || n % 2 != 0) throw Error("prop7 needs an even n >= 4");
      inst.a = std::sqrt(2.0);
      inst.b = 2.0 * std::sqrt(2.0 / n) - std::sqrt(2.0);
      inst.zbar = std::sqrt(2.0 / n);
      Mat Z(n, 1);
      for (int i = 0; i < n; ++i) Z(i, 0) = i < n / 2 ? inst.a : inst.b;
      inst.data = Dataset::from_points(std::move(Z));
      inst.model = {std::make_shared<QuadraticLoss>(), Regularizer::l1()};
      inst.lambda_star = inst.zbar;
      inst.grid = {0.0, inst.zbar};
      break;
    }
    case Case::Fig1a: {
      Vec mean(2);
      mean << 1.3893, 1.5;
      mean /= std::sqrt(static_cast<double>(n));
      Vec A(2);
      A << 1.0, 40.0;
      Mat Z = moment_matched_points(n, mean, p.seed);
      if (!p.literal) Z = Z * A.cwiseSqrt().cwiseInverse().asDiagonal();
      inst.data = Dataset::from_points(std::move(Z));
      // (beta - z)^T A (beta - z) is the quadratic loss with metric 2A.
      inst.model = {std::make_shared<QuadraticLoss>(2.0 * A), Regularizer::ridge(1.0)};
      inst.grid = log_grid(1e-3, 1e3, 200);
      break;
    }
    case Case::Fig1b: {
      Vec mean(3);
      mean << std::sqrt(1.0 / 8.0), std::sqrt(9.0 / 8.0), 2.0;
      mean /= std::sqrt(static_cast<double>(n));
      inst.data = Dataset::from_points(moment_matched_points(n, mean, p.seed));
      inst.model = {std::make_shared<QuadraticLoss>(), Regularizer::l1()};
      inst.grid = log_grid(1e-3, 1e3, 200);
      break;
    }
  }
  return inst;
}

double reference_gap(Case c, int n, double delta) {
  const double nn = n;
  switch (c) {
    case Case::Prop5:
      return nn / (4.0 * (nn - 1) * (nn - 1)) *
             (1.0 - 4.0 / std::sqrt(nn * std::numbers::pi) + 2.0 / nn);
    case Case::Prop6: return delta * std::sqrt(2.0 / std::numbers::pi) / nn;
    case Case::Prop7: return 5.0 / (2.0 * nn * nn);
    default: throw Error("no closed-form gap for " + case_name(c));
  }
}

bool reference_is_leading_order(Case c) { return c == Case::Prop6; }

double prop7_estimator_gap(int n) { return std::sqrt(2.0 / n); }

double prop5_identity_gap(const Dataset& data) {
  const double n = data.n();
  double s = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double z = data.X(i, 0);
    if (z < 0) s += z * z;
  }
  return -(2 * n - 1) / (2 * (n - 1) * (n - 1)) * s / n;
}

int count_strict_local_minima(const std::vector<double>& v) {
  int count = 0;
  for (size_t k = 1; k + 1 < v.size(); ++k) {
    if (v[k] < v[k - 1] && v[k] < v[k + 1]) ++count;
  }
  return count;
}

}  // namespace acvkit
