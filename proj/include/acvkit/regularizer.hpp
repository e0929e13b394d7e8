#pragma once

#include "acvkit/types.hpp"

#include <string>

namespace acvkit {

enum class RegKind { None, Ridge, L1, ElasticNet, PseudoHuber, PatchedLasso };

// Separable convex regularizer pi(beta) = sum_j pi_1(beta_j).
//
//   Ridge         scale * beta^2
//   L1            |beta|
//   ElasticNet    alpha |beta| + (1 - alpha)/2 beta^2
//   PseudoHuber   delta^2 (sqrt(1 + (beta/delta)^2) - 1)
//   PatchedLasso  delta/2 + beta^2/(2 delta) for |beta| < delta, |beta| otherwise
//
// Every kind is minimized at beta = 0.
struct Regularizer {
  RegKind kind = RegKind::Ridge;
  double scale = 1.0;
  double delta = 1.0;
  double alpha = 0.5;

  static Regularizer none();
  static Regularizer ridge(double scale = 1.0);
  static Regularizer l1();
  static Regularizer elastic_net(double alpha);
  static Regularizer pseudo_huber(double delta);
  static Regularizer patched_lasso(double delta);

  std::string name() const;

  // True when a second derivative exists everywhere it is used by Newton-type
  // approximations. PatchedLasso counts as smooth: its second derivative is
  // piecewise constant and taken from the |beta| branch at the seam.
  bool smooth() const;

  double value(const Vec& beta) const;
  // Gradient for smooth kinds; throws for L1 and ElasticNet.
  Vec gradient(const Vec& beta) const;
  // Second derivative on the region where pi is twice differentiable
  // (0 for the l1 part).
  Vec hessian_diag(const Vec& beta) const;
  Vec third_diag(const Vec& beta) const;

  // argmin_x 1/2 h (x - c)^2 + t pi_1(x) for h > 0, t >= 0. For the l1 part an
  // exact tie |h c| = t returns 0.
  double scalar_prox(double h, double c, double t) const;

  double value1(double b) const;
  double grad1(double b) const;
  double hess1(double b) const;
  double third1(double b) const;

  // Curvature constants: pi is c_pi strongly convex (used for lambda >= lambda_pi),
  // Hessian bounded by C_{pi,2}, and D^{order-1} pi is C_{pi,order} Lipschitz.
  double curvature() const;
  double curvature_threshold() const { return 0.0; }
  double hessian_bound() const;
  double derivative_lipschitz(int order) const;
};

}  // namespace acvkit
