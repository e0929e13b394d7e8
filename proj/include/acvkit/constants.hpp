#pragma once

#include "acvkit/cv.hpp"

#include <string>
#include <vector>

namespace acvkit {

// Curvature and smoothness constants entering the assessment and selection
// bounds. Unknown or unbounded constants are +infinity.
struct ConstantSet {
  double c_ell = 0.0;
  double c_pi = 0.0;
  double lambda_pi = 0.0;
  double c_m = 0.0;
  Vec L;
  double C_ell_2 = kInfinity;
  double C_pi_2 = kInfinity;
  double C_ell_3 = kInfinity;
  double C_pi_3 = kInfinity;
  double C_ell_4 = kInfinity;
  double C_pi_4 = kInfinity;
  double grad_reg_at_est0 = 0.0;
  int q = 2;
  double safety = 0.99;
  // "analytic" when computed in closed form, "empirical" when taken from
  // Hessian eigenvalues along the lambda grid.
  std::string c_m_source;
  std::string c_ell_source;
  std::vector<double> grid;
  bool evaluable = true;
  std::string note;

  // c_{lambda,lambda} = c_ell + lambda c_pi 1{lambda >= lambda_pi}.
  double c_lambda(double lambda) const;
  // C_{l,order} + lambda C_{pi,order}.
  double lipschitz(int order, double lambda) const;
};

struct ConstantOptions {
  double safety = 0.99;
  // Also evaluate curvature at the leave-out solutions, not only at beta_hat.
  bool include_fold_solutions = true;
  // Fit lambda = 0 to obtain ||grad pi(beta_hat(0))||.
  bool fit_lambda_zero = true;
};

// Constants valid over grid. fits[k] must be the full-data fit at grid[k];
// cv (optional) supplies leave-out solutions at the same grid points.
ConstantSet analytic_constants(const Model& model, const Dataset& data,
                               const std::vector<double>& grid, const std::vector<FitResult>& fits,
                               const FoldScheme& scheme, const SolverConfig& cfg,
                               const std::vector<CVResult>* cv = nullptr,
                               const ConstantOptions& opts = {}, Exec exec = Exec::Serial);

}  // namespace acvkit
