#pragma once

#include "acvkit/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace acvkit {

enum class Case { Prop5, Prop6, Prop7, Fig1a, Fig1b };

std::string case_name(Case c);
// Accepts prop5, prop6, prop7, fig1a, fig1b.
Case parse_case(const std::string& name);

struct CaseParams {
  int n = 100;
  // Patch width for Prop6; its lambda of interest is delta itself.
  double delta = 0.05;
  // Fig1a only: take the caption moments as moments of z itself instead of
  // the whitened variable A^{1/2} z.
  bool literal = false;
  // Gaussian draw behind the moment-matched Fig1 datasets.
  std::uint64_t seed = 7;
};

struct CounterexampleInstance {
  Case kind = Case::Prop5;
  std::string name;
  Dataset data;
  Model model;
  double zbar = 0.0;
  // Atom magnitudes for the discrete cases.
  double a = 0.0;
  double b = 0.0;
  // The lambda the closed forms talk about (zbar, delta, ...).
  double lambda_star = 0.0;
  // A grid suited to the case, sorted ascending.
  std::vector<double> grid;
};

// Real roots a > b of a^2 + b^2 = 2, a + b = 2 sqrt(2/pi).
void prop5_atoms(double& a, double& b);

// n x d points whose sample mean is exactly `mean` and whose sample covariance
// (divisor n) is exactly the identity: Gaussian draws, centered, whitened by
// the inverse Cholesky factor, then shifted.
Mat moment_matched_points(int n, const Vec& mean, std::uint64_t seed);

CounterexampleInstance build(Case c, const CaseParams& params);

// Closed forms as printed:
//   Prop5  ACV^IJ(zbar) - CV(zbar) = (n / (4 (n-1)^2)) (1 - 4/sqrt(n pi) + 2/n)
//   Prop6  ACV^IJ(delta) - CV(delta) ~ delta sqrt(2/pi) / n  (leading term)
//   Prop7  ProxACV(0) - ProxACV(zbar) = 5 / (2 n^2)
double reference_gap(Case c, int n, double delta = 0.05);
bool reference_is_leading_order(Case c);

// beta_hat(0) - beta_hat(zbar) = sqrt(2/n) on the Prop7 data.
double prop7_estimator_gap(int n);

// Exact value of ACV^IJ(zbar) - CV(zbar) on 1D data with beta_hat(zbar) = 0,
// where every leave-one-out fit is max(-z_i/(n-1), 0):
//   -(2n - 1) / (2 (n-1)^2) * (1/n) sum_i z_i^2 1{z_i < 0}.
double prop5_identity_gap(const Dataset& data);

// Interior strict local minima of a sampled curve.
int count_strict_local_minima(const std::vector<double>& values);

// n log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace acvkit
