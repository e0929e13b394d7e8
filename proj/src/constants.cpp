#include "acvkit/constants.hpp"

#include <algorithm>
#include <cmath>

namespace acvkit {

double ConstantSet::c_lambda(double lambda) const {
  if (lambda >= lambda_pi && c_pi > 0) {
    if (is_infinite(lambda)) return kInfinity;
    return c_ell + lambda * c_pi;
  }
  return c_ell;
}

double ConstantSet::lipschitz(int order, double lambda) const {
  double cl = 0.0;
  double cp = 0.0;
  switch (order) {
    case 2: cl = C_ell_2; cp = C_pi_2; break;
    case 3: cl = C_ell_3; cp = C_pi_3; break;
    case 4: cl = C_ell_4; cp = C_pi_4; break;
    default: throw Error("lipschitz supports orders 2, 3 and 4");
  }
  if (lambda == 0.0 || cp == 0.0) return cl;
  return cl + lambda * cp;
}

namespace {

double finite_or_inf(const std::optional<double>& v) { return v ? *v : kInfinity; }

struct CurvaturePair {
  double objective = kInfinity;
  double loss = kInfinity;
};

CurvaturePair min_pair(CurvaturePair a, const CurvaturePair& b) {
  a.objective = std::min(a.objective, b.objective);
  a.loss = std::min(a.loss, b.loss);
  return a;
}

// Smallest eigenvalues of the leave-out loss Hessian and of the leave-out
// objective Hessian (regularizer part from its smooth-region second derivative).
CurvaturePair fold_curvature(const Model& model, const Dataset& data, const Vec& w,
                             const Vec& beta, double lambda) {
  Mat H = model.loss->hessian(data, w, beta);
  CurvaturePair c;
  c.loss = min_eigenvalue(H);
  if (lambda != 0.0) H.diagonal() += lambda * model.reg.hessian_diag(beta);
  c.objective = min_eigenvalue(H);
  return c;
}

Vec regularizer_direction(const Regularizer& reg, const Vec& beta) {
  if (reg.smooth()) return reg.gradient(beta);
  // Minimal-norm subgradient direction of the l1 part on the support.
  Vec g(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double s = (beta(j) > 0) - (beta(j) < 0);
    g(j) = reg.kind == RegKind::ElasticNet ? reg.alpha * s + (1 - reg.alpha) * beta(j) : s;
  }
  return g;
}

}  // namespace

ConstantSet analytic_constants(const Model& model, const Dataset& data,
                               const std::vector<double>& grid, const std::vector<FitResult>& fits,
                               const FoldScheme& scheme, const SolverConfig& cfg,
                               const std::vector<CVResult>* cv, const ConstantOptions& opts,
                               Exec exec) {
  if (fits.size() != grid.size()) throw Error("analytic_constants: one fit per grid point needed");
  if (cv && cv->size() != grid.size()) throw Error("analytic_constants: cv size mismatch");
  const int n = data.n();
  ConstantSet cs;
  cs.grid = grid;
  cs.safety = opts.safety;
  cs.q = 2;

  cs.L.resize(n);
  bool have_L = true;
  for (int i = 0; i < n; ++i) {
    const auto L = model.loss->gradient_lipschitz(data, i);
    cs.L(i) = L ? *L : kInfinity;
    have_L = have_L && L.has_value();
  }
  cs.C_ell_2 = finite_or_inf(model.loss->hessian_bound(data));
  cs.C_ell_3 = finite_or_inf(model.loss->derivative_lipschitz(data, 3));
  cs.C_ell_4 = finite_or_inf(model.loss->derivative_lipschitz(data, 4));
  cs.C_pi_2 = model.reg.hessian_bound();
  cs.C_pi_3 = model.reg.derivative_lipschitz(3);
  cs.C_pi_4 = model.reg.derivative_lipschitz(4);
  cs.c_pi = model.reg.curvature();
  cs.lambda_pi = model.reg.curvature_threshold();

  double lambda_min = kInfinity;
  for (double l : grid) lambda_min = std::min(lambda_min, l);
  if (grid.empty()) lambda_min = 0.0;

  if (model.loss->constant_hessian()) {
    // Hessians do not depend on beta: the leave-out loss curvature is exact
    // and the regularizer adds lambda c_pi on top.
    const Vec zero = Vec::Zero(model.param_dim(data));
    double c = kInfinity;
    for (const auto& S : scheme.held_out) {
      c = std::min(c, min_eigenvalue(model.loss->hessian(data, holdout_weights(n, S), zero)));
    }
    cs.c_ell = c;
    cs.c_ell_source = "analytic";
    const double reg_part =
        (cs.c_pi > 0 && lambda_min >= cs.lambda_pi && std::isfinite(lambda_min)) ? lambda_min * cs.c_pi
                                                                                  : 0.0;
    cs.c_m = c + reg_part;
    cs.c_m_source = "analytic";
  } else {
    std::vector<CurvaturePair> per_lambda(grid.size());
    for_each_index(static_cast<int>(grid.size()), exec, [&](int k) {
      const double lambda = grid[static_cast<size_t>(k)];
      CurvaturePair acc;
      if (is_infinite(lambda)) {
        per_lambda[static_cast<size_t>(k)] = acc;
        return;
      }
      const Vec& beta = fits[static_cast<size_t>(k)].beta;
      for (int f = 0; f < scheme.size(); ++f) {
        const Vec w = holdout_weights(n, scheme.held_out[static_cast<size_t>(f)]);
        acc = min_pair(acc, fold_curvature(model, data, w, beta, lambda));
        if (cv && opts.include_fold_solutions) {
          const Vec& bf = (*cv)[static_cast<size_t>(k)].estimators[static_cast<size_t>(f)];
          acc = min_pair(acc, fold_curvature(model, data, w, bf, lambda));
        }
      }
      per_lambda[static_cast<size_t>(k)] = acc;
    });
    CurvaturePair all;
    for (const auto& c : per_lambda) all = min_pair(all, c);
    cs.c_m = opts.safety * std::max(0.0, all.objective);
    cs.c_ell = opts.safety * std::max(0.0, all.loss);
    cs.c_m_source = "empirical";
    cs.c_ell_source = "empirical";
  }

  if (opts.fit_lambda_zero) {
    try {
      const FitResult f0 = fit_erm(model, data, full_weights(n), 0.0, cfg);
      if (f0.converged) {
        cs.grad_reg_at_est0 = regularizer_direction(model.reg, f0.beta).norm();
      } else {
        cs.note += "lambda = 0 fit did not converge; ";
      }
    } catch (const Error& e) {
      cs.note += std::string("lambda = 0 fit failed: ") + e.what() + "; ";
    }
  }

  if (!have_L) {
    cs.evaluable = false;
    cs.note += "loss has no finite per-point gradient Lipschitz constants; ";
  }
  if (!(cs.c_m > 0) || !std::isfinite(cs.c_m)) {
    cs.evaluable = false;
    cs.c_m = std::max(0.0, std::isfinite(cs.c_m) ? cs.c_m : 0.0);
    cs.note += "no positive curvature constant c_m; ";
  }
  return cs;
}

}  // namespace acvkit
