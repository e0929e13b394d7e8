#pragma once

#include "acvkit/acv.hpp"

namespace acvkit {

struct ProxOptions {
  // Accept a singular loss Hessian (p > n designs). The prox is then solved in
  // argmin form and must have a unique minimizer.
  bool allow_singular_hessian = false;
};

// prox_{lambda pi}^{H_i}(beta_hat - H_i^{-1} g_i) with H_i = Hess l(P_{-S}, beta_hat)
// and g_i = grad l(P_{-S}, beta_hat).
ApproxResult proxacv(const Model& model, const Dataset& data, const FitResult& fit,
                     const FoldScheme& scheme, const SolverConfig& cfg,
                     const ProxOptions& opts = {}, Exec exec = Exec::Serial);

// Same with the shared full-data loss Hessian.
ApproxResult proxacv_ij(const Model& model, const Dataset& data, const FitResult& fit,
                        const FoldScheme& scheme, const SolverConfig& cfg,
                        const ProxOptions& opts = {}, Exec exec = Exec::Serial);

// Minimizer of the p-th order Taylor model of l(P_{-S}, .) about beta_hat
// (optionally plus (Lip/(p+1)) ||beta - beta_hat||^{p+1}) plus lambda pi.
ApproxResult proxacv_p(const Model& model, const Dataset& data, const FitResult& fit,
                       const FoldScheme& scheme, const TaylorOptions& taylor,
                       const SolverConfig& cfg, Exec exec = Exec::Serial);

}  // namespace acvkit
