#pragma once

#include "acvkit/model.hpp"

#include <optional>

namespace acvkit {

enum class ProxMethod { CoordinateDescent, AcceleratedGradient };

struct SolverConfig {
  double tol_fit = 1e-10;
  int max_iter = 200;
  double inner_tol = 1e-12;
  int inner_max_iter = 10000;
  double ls_factor = 0.5;
  double ls_sufficient = 1e-4;
  ProxMethod prox_method = ProxMethod::CoordinateDescent;
  // Start each lambda of a path from the previous lambda's fit.
  bool warm_start_path = false;

  void validate() const;
};

struct FitResult {
  double lambda = 0.0;
  Vec beta;
  double objective = 0.0;
  // ||grad m|| for smooth objectives, ||beta - prox(beta - grad l)|| otherwise.
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// argmin_beta sum_i w_i l(z_i, beta) + lambda pi(beta). lambda = infinity
// returns argmin pi (zero). Smooth objectives use damped Newton; non-smooth
// ones use proximal Newton, both with backtracking on the objective.
FitResult fit_erm(const Model& model, const Dataset& data, const Vec& w, double lambda,
                  const SolverConfig& cfg, const Vec* warm_start = nullptr);

// Fits every lambda in grid (ascending order not required).
std::vector<FitResult> fit_path(const Model& model, const Dataset& data, const Vec& w,
                                const std::vector<double>& grid, const SolverConfig& cfg,
                                Exec exec = Exec::Serial);

// argmin_x 1/2 x^T H x - b^T x + t pi(x) for symmetric positive semidefinite H.
// This is the generalized prox written without H^{-1}, so it stays usable
// when H is singular as long as the minimizer is unique.
Vec solve_penalized_quadratic(const Mat& H, const Vec& b, const Regularizer& reg, double t,
                              const SolverConfig& cfg, const Vec* x0 = nullptr);

// prox_{t pi}^H(v) = argmin_x 1/2 ||v - x||_H^2 + t pi(x). Throws if H is not
// positive definite.
Vec generalized_prox(const Mat& H, const Vec& v, const Regularizer& reg, double t,
                     const SolverConfig& cfg);

// beta0 - hess^{-1} grad. Throws naming the smallest eigenvalue if hess is
// not positive definite.
Vec newton_step(const Vec& beta0, const Vec& grad, const Mat& hess);

// prox_{lambda pi}^{H}(beta0 - H^{-1} grad_loss).
Vec prox_newton_step(const Vec& beta0, const Vec& grad_loss, const Mat& hess_loss,
                     const Regularizer& reg, double lambda, const SolverConfig& cfg);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Mat& H);
// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration_max_eigenvalue(const Mat& H, double tol = 1e-8, int max_iter = 10000);

}  // namespace acvkit
