#include "acvkit/acv.hpp"

#include "taylor_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace acvkit {

Vec heldout_gradient(const Model& model, const Dataset& data, const std::vector<int>& held_out,
                     const Vec& beta) {
  Vec g = Vec::Zero(beta.size());
  for (int j : held_out) g += model.loss->gradient(data, j, beta);
  return g / static_cast<double>(data.n());
}

namespace {

ApproxResult make_result(double lambda, std::string method, int folds) {
  ApproxResult r;
  r.lambda = lambda;
  r.method = std::move(method);
  r.estimators.resize(static_cast<size_t>(folds));
  r.heldout_loss.resize(static_cast<size_t>(folds));
  return r;
}

void finish(const Model& model, const Dataset& data, const FoldScheme& scheme, ApproxResult& r) {
  for (int f = 0; f < scheme.size(); ++f) {
    r.heldout_loss[static_cast<size_t>(f)] =
        heldout_loss(model, data, scheme.held_out[static_cast<size_t>(f)],
                     r.estimators[static_cast<size_t>(f)]);
  }
  r.value = fold_average(r.heldout_loss);
}

void require_smooth(const Model& model, const char* method) {
  if (!model.reg.smooth()) {
    throw Error(std::string(method) + " needs a twice-differentiable regularizer; " +
                model.reg.name() + " is non-smooth, use proxacv or acv_support_restricted");
  }
}

// Hessian of the leave-out objective from the full-data one by subtracting
// the held-out points' loss Hessians.
Mat fold_hessian(const Model& model, const Dataset& data, const std::vector<int>& held_out,
                 const Vec& beta, const Mat& full) {
  Mat H = full;
  for (int j : held_out) H -= model.loss->hessian(data, j, beta) / static_cast<double>(data.n());
  return H;
}

Mat full_objective_hessian(const Model& model, const Dataset& data, const Vec& beta,
                           double lambda) {
  Mat H = model.loss->hessian(data, full_weights(data.n()), beta);
  if (lambda != 0.0) H.diagonal() += lambda * model.reg.hessian_diag(beta);
  return H;
}

Vec solve_pd(const Mat& H, const Vec& rhs, const std::string& what) {
  Eigen::LLT<Mat> llt(H);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << what << " is not positive definite (smallest eigenvalue " << min_eigenvalue(H) << ")";
    throw Error(os.str());
  }
  return llt.solve(rhs);
}

std::string fold_label(int f) { return "fold " + std::to_string(f) + " Hessian"; }

}  // namespace

ApproxResult acv(const Model& model, const Dataset& data, const FitResult& fit,
                 const FoldScheme& scheme, Exec exec) {
  require_smooth(model, "acv");
  ApproxResult r = make_result(fit.lambda, "acv", scheme.size());
  if (is_infinite(fit.lambda)) {
    for (auto& e : r.estimators) e = fit.beta;
    finish(model, data, scheme, r);
    return r;
  }
  const Mat full = full_objective_hessian(model, data, fit.beta, fit.lambda);
  for_each_index(scheme.size(), exec, [&](int f) {
    const auto& S = scheme.held_out[static_cast<size_t>(f)];
    const Mat H = fold_hessian(model, data, S, fit.beta, full);
    const Vec g = heldout_gradient(model, data, S, fit.beta);
    r.estimators[static_cast<size_t>(f)] = fit.beta + solve_pd(H, g, fold_label(f));
  });
  finish(model, data, scheme, r);
  return r;
}

ApproxResult acv_ij(const Model& model, const Dataset& data, const FitResult& fit,
                    const FoldScheme& scheme, Exec exec) {
  require_smooth(model, "acv_ij");
  ApproxResult r = make_result(fit.lambda, "acv_ij", scheme.size());
  if (is_infinite(fit.lambda)) {
    for (auto& e : r.estimators) e = fit.beta;
    finish(model, data, scheme, r);
    return r;
  }
  const Mat full = full_objective_hessian(model, data, fit.beta, fit.lambda);
  const Eigen::LLT<Mat> llt(full);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "full-data Hessian is not positive definite (smallest eigenvalue "
       << min_eigenvalue(full) << ")";
    throw Error(os.str());
  }
  for_each_index(scheme.size(), exec, [&](int f) {
    const auto& S = scheme.held_out[static_cast<size_t>(f)];
    r.estimators[static_cast<size_t>(f)] =
        fit.beta + llt.solve(heldout_gradient(model, data, S, fit.beta));
  });
  finish(model, data, scheme, r);
  return r;
}

namespace detail {

Vec minimize_taylor(const TaylorModel& m, Vec d, const TaylorOptions& opts, int fold) {
  Vec grad;
  Mat hess;
  for (int it = 0; it < opts.max_iter; ++it) {
    m.grad_hess(d, grad, hess);
    if (grad.norm() <= opts.tol) return d;
    Eigen::LLT<Mat> llt(hess);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "Taylor model for fold " << fold << " is not strongly convex at the iterate "
         << "(smallest eigenvalue " << min_eigenvalue(hess) << ")";
      throw Error(os.str());
    }
    const Vec step = -llt.solve(grad);
    const double f0 = m.value(d);
    const double slope = grad.dot(step);
    double t = 1.0;
    while (t > 1e-20) {
      const double f = m.value(d + t * step);
      if (f <= f0 + 1e-4 * t * slope + 8 * std::numeric_limits<double>::epsilon() * (1 + std::abs(f0))) break;
      t *= 0.5;
    }
    if (t <= 1e-20) break;
    d += t * step;
  }
  m.grad_hess(d, grad, hess);
  if (grad.norm() <= opts.tol * 10) return d;
  std::ostringstream os;
  os << "Taylor model for fold " << fold << " did not converge (gradient norm " << grad.norm()
     << ")";
  throw Error(os.str());
}

double taylor_lipschitz(const Model& model, const Dataset& data, double lambda,
                        const TaylorOptions& opts, bool loss_only) {
  if (opts.lipschitz) return *opts.lipschitz;
  const auto cl = model.loss->derivative_lipschitz(data, opts.p + 1);
  const double cp = loss_only ? 0.0 : model.reg.derivative_lipschitz(opts.p + 1);
  if (!cl || !std::isfinite(*cl) || !std::isfinite(cp)) {
    throw Error("regularized Taylor model needs a finite Lipschitz constant for the order-" +
                std::to_string(opts.p) + " derivative");
  }
  return *cl + (loss_only || lambda == 0.0 ? 0.0 : lambda * cp);
}

}  // namespace detail

std::string taylor_method_name(const char* base, const TaylorOptions& opts) {
  return std::string(base) + "_p" + std::to_string(opts.p) + (opts.regularized ? "_reg" : "");
}

ApproxResult acv_p(const Model& model, const Dataset& data, const FitResult& fit,
                   const FoldScheme& scheme, const TaylorOptions& opts, Exec exec) {
  require_smooth(model, "acv_p");
  if (opts.p != 2 && opts.p != 3) throw Error("acv_p supports p in {2, 3}");
  ApproxResult r = make_result(fit.lambda, taylor_method_name("acv", opts), scheme.size());
  if (is_infinite(fit.lambda)) {
    for (auto& e : r.estimators) e = fit.beta;
    finish(model, data, scheme, r);
    return r;
  }
  const double lambda = fit.lambda;
  const double lip = opts.regularized ? detail::taylor_lipschitz(model, data, lambda, opts, false) : 0.0;
  const Mat full = full_objective_hessian(model, data, fit.beta, lambda);
  const Vec reg_third = model.reg.third_diag(fit.beta);
  for_each_index(scheme.size(), exec, [&](int f) {
    const auto& S = scheme.held_out[static_cast<size_t>(f)];
    detail::TaylorModel m;
    m.p = opts.p;
    m.H = fold_hessian(model, data, S, fit.beta, full);
    const Vec gs = heldout_gradient(model, data, S, fit.beta);
    m.g = -gs;
    m.lip = lip;
    const Vec w = holdout_weights(data.n(), S);
    m.third = [&, w](const Vec& d) {
      Mat T = model.loss->third_matrix(data, w, fit.beta, d);
      if (lambda != 0.0) T.diagonal() += lambda * reg_third.cwiseProduct(d);
      return T;
    };
    const Vec d0 = solve_pd(m.H, gs, fold_label(f));
    const bool exact = opts.p == 2 && !opts.regularized;
    const Vec d = exact ? d0 : detail::minimize_taylor(m, d0, opts, f);
    r.estimators[static_cast<size_t>(f)] = fit.beta + d;
  });
  finish(model, data, scheme, r);
  return r;
}

ApproxResult acv_support_restricted(const Model& model, const Dataset& data, const FitResult& fit,
                                    const FoldScheme& scheme, bool ij, double support_tol,
                                    Exec exec) {
  ApproxResult r = make_result(fit.lambda, ij ? "acv_ij_sr" : "acv_sr", scheme.size());
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    if (std::abs(fit.beta(j)) > support_tol) support.push_back(j);
  }
  if (support.empty() || is_infinite(fit.lambda)) {
    for (auto& e : r.estimators) e = fit.beta;
    finish(model, data, scheme, r);
    return r;
  }
  const Eigen::Index s = static_cast<Eigen::Index>(support.size());
  auto restrict_mat = [&](const Mat& M) {
    Mat out(s, s);
    for (Eigen::Index a = 0; a < s; ++a) {
      for (Eigen::Index b = 0; b < s; ++b) out(a, b) = M(support[a], support[b]);
    }
    return out;
  };
  auto restrict_vec = [&](const Vec& v) {
    Vec out(s);
    for (Eigen::Index a = 0; a < s; ++a) out(a) = v(support[a]);
    return out;
  };
  const Mat full = full_objective_hessian(model, data, fit.beta, fit.lambda);
  Eigen::LLT<Mat> shared;
  if (ij) {
    shared.compute(restrict_mat(full));
    if (shared.info() != Eigen::Success) {
      throw Error("restricted full-data Hessian is singular on the support");
    }
  }
  for_each_index(scheme.size(), exec, [&](int f) {
    const auto& S = scheme.held_out[static_cast<size_t>(f)];
    const Vec g = restrict_vec(heldout_gradient(model, data, S, fit.beta));
    const Vec step = ij ? Vec(shared.solve(g))
                        : solve_pd(restrict_mat(fold_hessian(model, data, S, fit.beta, full)), g,
                                   "restricted " + fold_label(f));
    Vec e = fit.beta;
    for (Eigen::Index a = 0; a < s; ++a) e(support[a]) += step(a);
    r.estimators[static_cast<size_t>(f)] = std::move(e);
  });
  finish(model, data, scheme, r);
  return r;
}

}  // namespace acvkit
