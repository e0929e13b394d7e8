#pragma once

#include "acvkit/cv.hpp"

#include <optional>
#include <string>

namespace acvkit {

using ApproxResult = FoldEstimates;

// Sum of held-out loss gradients at beta, divided by n.
Vec heldout_gradient(const Model& model, const Dataset& data, const std::vector<int>& held_out,
                     const Vec& beta);

// beta_hat + H_m(P_{-S}, beta_hat, lambda)^{-1} sum_{i in S} grad l(z_i, beta_hat) / n.
ApproxResult acv(const Model& model, const Dataset& data, const FitResult& fit,
                 const FoldScheme& scheme, Exec exec = Exec::Serial);

// Same step with the shared full-data Hessian H_m(P_n, beta_hat, lambda),
// factorized once.
ApproxResult acv_ij(const Model& model, const Dataset& data, const FitResult& fit,
                    const FoldScheme& scheme, Exec exec = Exec::Serial);

struct TaylorOptions {
  int p = 3;
  bool regularized = false;
  // Lipschitz constant of the p-th derivative used by the regularized model;
  // when unset it is taken from the loss and regularizer constants.
  std::optional<double> lipschitz;
  double tol = 1e-11;
  int max_iter = 100;
};

// Method tag such as "acv_p3" or "proxacv_p3_reg".
std::string taylor_method_name(const char* base, const TaylorOptions& opts);

// Minimizer of the p-th order Taylor model of m(P_{-S}, ., lambda) about
// beta_hat, optionally plus (Lip/(p+1)) ||beta - beta_hat||^{p+1}.
ApproxResult acv_p(const Model& model, const Dataset& data, const FitResult& fit,
                   const FoldScheme& scheme, const TaylorOptions& opts, Exec exec = Exec::Serial);

// ACV or ACV-IJ restricted to the support S_hat = {j : |beta_hat_j| > support_tol};
// off-support coordinates stay zero.
ApproxResult acv_support_restricted(const Model& model, const Dataset& data, const FitResult& fit,
                                    const FoldScheme& scheme, bool ij, double support_tol = 1e-12,
                                    Exec exec = Exec::Serial);

}  // namespace acvkit
