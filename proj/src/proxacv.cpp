#include "acvkit/proxacv.hpp"

#include "taylor_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace acvkit {

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

void check_metric(const Mat& H, const ProxOptions& opts, const std::string& what) {
  if (opts.allow_singular_hessian) return;
  Eigen::LLT<Mat> llt(H);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << what << " is not positive definite (smallest eigenvalue " << min_eigenvalue(H)
       << "); set allow_singular_hessian to solve the prox in argmin form";
    throw Error(os.str());
  }
}

// argmin_b 1/2 ||beta_hat - b||_H^2 + b'g + lambda pi(b).
Vec prox_estimator(const Mat& H, const Vec& g, const Vec& beta_hat, const Regularizer& reg,
                   double lambda, const SolverConfig& cfg) {
  return solve_penalized_quadratic(H, H * beta_hat - g, reg, lambda, cfg, &beta_hat);
}

struct FoldLossQuantities {
  Mat H;  // Hess l(P_{-S}, beta_hat)
  Vec g;  // grad l(P_{-S}, beta_hat)
};

FoldLossQuantities fold_loss(const Model& model, const Dataset& data,
                             const std::vector<int>& held_out, const Vec& beta, const Mat& full_H,
                             const Vec& full_g) {
  FoldLossQuantities q{full_H, full_g};
  const double n = static_cast<double>(data.n());
  for (int j : held_out) {
    q.H -= model.loss->hessian(data, j, beta) / n;
    q.g -= model.loss->gradient(data, j, beta) / n;
  }
  return q;
}

bool trivial(const FitResult& fit, ApproxResult& r) {
  if (!is_infinite(fit.lambda)) return false;
  for (auto& e : r.estimators) e = fit.beta;
  return true;
}

}  // namespace

ApproxResult proxacv(const Model& model, const Dataset& data, const FitResult& fit,
                     const FoldScheme& scheme, const SolverConfig& cfg, const ProxOptions& opts,
                     Exec exec) {
  ApproxResult r = make_result(fit.lambda, "proxacv", scheme.size());
  if (!trivial(fit, r)) {
    const Vec w = full_weights(data.n());
    const Mat full_H = model.loss->hessian(data, w, fit.beta);
    const Vec full_g = model.loss->gradient(data, w, fit.beta);
    for_each_index(scheme.size(), exec, [&](int f) {
      const auto q = fold_loss(model, data, scheme.held_out[static_cast<size_t>(f)], fit.beta,
                               full_H, full_g);
      check_metric(q.H, opts, "fold " + std::to_string(f) + " loss Hessian");
      r.estimators[static_cast<size_t>(f)] =
          prox_estimator(q.H, q.g, fit.beta, model.reg, fit.lambda, cfg);
    });
  }
  finish(model, data, scheme, r);
  return r;
}

ApproxResult proxacv_ij(const Model& model, const Dataset& data, const FitResult& fit,
                        const FoldScheme& scheme, const SolverConfig& cfg,
                        const ProxOptions& opts, Exec exec) {
  ApproxResult r = make_result(fit.lambda, "proxacv_ij", scheme.size());
  if (!trivial(fit, r)) {
    const Vec w = full_weights(data.n());
    const Mat H = model.loss->hessian(data, w, fit.beta);
    const Vec full_g = model.loss->gradient(data, w, fit.beta);
    check_metric(H, opts, "full-data loss Hessian");
    for_each_index(scheme.size(), exec, [&](int f) {
      const auto& S = scheme.held_out[static_cast<size_t>(f)];
      const Vec g = full_g - heldout_gradient(model, data, S, fit.beta);
      r.estimators[static_cast<size_t>(f)] =
          prox_estimator(H, g, fit.beta, model.reg, fit.lambda, cfg);
    });
  }
  finish(model, data, scheme, r);
  return r;
}

namespace {

// Proximal Newton on taylor(beta - beta_hat) + lambda pi(beta), started at x.
Vec minimize_prox_taylor(const detail::TaylorModel& m, const Vec& beta_hat, Vec x,
                         const Regularizer& reg, double lambda, const TaylorOptions& opts,
                         const SolverConfig& cfg, int fold) {
  auto F = [&](const Vec& b) { return m.value(b - beta_hat) + lambda * reg.value(b); };
  Vec grad;
  Mat hess;
  double step_norm = kInfinity;
  for (int it = 0; it < opts.max_iter; ++it) {
    m.grad_hess(x - beta_hat, grad, hess);
    Eigen::LLT<Mat> llt(hess);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "loss Taylor model for fold " << fold << " is not strongly convex at the iterate "
         << "(smallest eigenvalue " << min_eigenvalue(hess) << ")";
      throw Error(os.str());
    }
    const Vec target = solve_penalized_quadratic(hess, hess * x - grad, reg, lambda, cfg, &x);
    const Vec dir = target - x;
    step_norm = dir.norm();
    if (step_norm <= opts.tol) return target;
    const double f0 = F(x);
    const double decrease = grad.dot(dir) + lambda * (reg.value(target) - reg.value(x));
    double t = 1.0;
    while (t > 1e-20) {
      const double f = F(x + t * dir);
      if (f <= f0 + 1e-4 * t * decrease +
                   8 * std::numeric_limits<double>::epsilon() * (1 + std::abs(f0))) {
        break;
      }
      t *= 0.5;
    }
    if (t <= 1e-20) break;
    x += t * dir;
  }
  if (step_norm <= opts.tol * 10) return x;
  std::ostringstream os;
  os << "proximal Taylor model for fold " << fold << " did not converge (step norm " << step_norm
     << ")";
  throw Error(os.str());
}

}  // namespace

ApproxResult proxacv_p(const Model& model, const Dataset& data, const FitResult& fit,
                       const FoldScheme& scheme, const TaylorOptions& taylor,
                       const SolverConfig& cfg, Exec exec) {
  if (taylor.p != 2 && taylor.p != 3) throw Error("proxacv_p supports p in {2, 3}");
  ApproxResult r = make_result(fit.lambda, taylor_method_name("proxacv", taylor), scheme.size());
  if (!trivial(fit, r)) {
    const double lip =
        taylor.regularized ? detail::taylor_lipschitz(model, data, fit.lambda, taylor, true) : 0.0;
    const Vec w = full_weights(data.n());
    const Mat full_H = model.loss->hessian(data, w, fit.beta);
    const Vec full_g = model.loss->gradient(data, w, fit.beta);
    for_each_index(scheme.size(), exec, [&](int f) {
      const auto& S = scheme.held_out[static_cast<size_t>(f)];
      const auto q = fold_loss(model, data, S, fit.beta, full_H, full_g);
      check_metric(q.H, {}, "fold " + std::to_string(f) + " loss Hessian");
      const Vec start = prox_estimator(q.H, q.g, fit.beta, model.reg, fit.lambda, cfg);
      if (taylor.p == 2 && !taylor.regularized) {
        r.estimators[static_cast<size_t>(f)] = start;
        return;
      }
      detail::TaylorModel m;
      m.p = taylor.p;
      m.g = q.g;
      m.H = q.H;
      m.lip = lip;
      const Vec wf = holdout_weights(data.n(), S);
      m.third = [&, wf](const Vec& d) { return model.loss->third_matrix(data, wf, fit.beta, d); };
      r.estimators[static_cast<size_t>(f)] =
          minimize_prox_taylor(m, fit.beta, start, model.reg, fit.lambda, taylor, cfg, f);
    });
  }
  finish(model, data, scheme, r);
  return r;
}

}  // namespace acvkit
