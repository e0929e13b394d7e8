#include "acvkit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace acvkit {

void SolverConfig::validate() const {
  if (!(tol_fit > 0) || !(inner_tol > 0)) throw Error("solver tolerances must be positive");
  if (max_iter < 1 || inner_max_iter < 1) throw Error("solver iteration limits must be >= 1");
  if (!(ls_factor > 0 && ls_factor < 1)) throw Error("line-search factor must lie in (0, 1)");
  if (!(ls_sufficient > 0 && ls_sufficient < 0.5)) {
    throw Error("sufficient-decrease constant must lie in (0, 0.5)");
  }
}

double min_eigenvalue(const Mat& H) {
  if (H.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double power_iteration_max_eigenvalue(const Mat& H, double tol, int max_iter) {
  const Eigen::Index d = H.rows();
  if (d == 0) return 0.0;
  Vec v = Vec::Ones(d) / std::sqrt(static_cast<double>(d));
  double lam = v.dot(H * v);
  for (int it = 0; it < max_iter; ++it) {
    Vec hv = H * v;
    const double nrm = hv.norm();
    if (nrm == 0.0) return 0.0;
    v = hv / nrm;
    const double next = v.dot(H * v);
    if (std::abs(next - lam) <= tol * std::abs(next)) return next;
    lam = next;
  }
  return lam;
}

namespace {

std::string not_pd_message(const char* what, const Mat& H) {
  std::ostringstream os;
  os << what << " is not positive definite (smallest eigenvalue " << min_eigenvalue(H) << ")";
  return os.str();
}

bool is_diagonal(const Mat& H) {
  for (Eigen::Index j = 0; j < H.cols(); ++j) {
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      if (i != j && H(i, j) != 0.0) return false;
    }
  }
  return true;
}

// argmin_x -r x + t pi_1(x) for a coordinate with no quadratic curvature.
double flat_coordinate(const Regularizer& reg, double t, double r) {
  if (reg.kind == RegKind::L1 && std::abs(r) <= t) return 0.0;
  if (reg.kind != RegKind::L1 && r == 0.0) return 0.0;
  throw Error("penalized quadratic has a flat coordinate and is unbounded below or ill-posed");
}

Vec coordinate_descent(const Mat& H, const Vec& b, const Regularizer& reg, double t,
                       const SolverConfig& cfg, Vec x) {
  const Eigen::Index d = H.rows();
  Vec r = b - H * x;  // minus the gradient of the smooth part
  int sweeps = 0;
  double last_change = kInfinity;

  auto sweep = [&](const std::vector<Eigen::Index>* subset) {
    double max_change = 0.0;
    const Eigen::Index m = subset ? static_cast<Eigen::Index>(subset->size()) : d;
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index j = subset ? (*subset)[k] : k;
      const double hjj = H(j, j);
      const double xn = hjj > 0 ? reg.scalar_prox(hjj, x(j) + r(j) / hjj, t)
                                : flat_coordinate(reg, t, r(j) + hjj * x(j));
      const double delta = xn - x(j);
      if (delta != 0.0) {
        r.noalias() -= H.col(j) * delta;
        x(j) = xn;
        max_change = std::max(max_change, std::abs(delta) * std::sqrt(std::max(hjj, 1e-300)));
      }
    }
    ++sweeps;
    return max_change;
  };

  auto small = [&](double change) {
    return change <= cfg.inner_tol * (1.0 + x.cwiseAbs().maxCoeff() * std::sqrt(H.diagonal().cwiseAbs().maxCoeff()));
  };

  while (sweeps < cfg.inner_max_iter) {
    r = b - H * x;
    last_change = sweep(nullptr);
    if (small(last_change)) return x;
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (x(j) != 0.0) active.push_back(j);
    }
    if (active.empty() || static_cast<Eigen::Index>(active.size()) == d) continue;
    while (sweeps < cfg.inner_max_iter) {
      const double change = sweep(&active);
      if (small(change)) break;
    }
  }
  std::ostringstream os;
  os << "coordinate descent did not converge in " << cfg.inner_max_iter
     << " sweeps (last change " << last_change << ")";
  throw Error(os.str());
}

Vec accelerated_gradient(const Mat& H, const Vec& b, const Regularizer& reg, double t,
                         const SolverConfig& cfg, Vec x) {
  const double L = power_iteration_max_eigenvalue(H);
  if (!(L > 0)) throw Error("penalized quadratic has a zero Hessian");
  // Power iteration approaches L from below; a small margin keeps 1/L a valid step.
  const double step = 1.0 / (L * (1.0 + 1e-6));
  Vec y = x;
  double theta = 1.0;
  double change = kInfinity;
  for (int it = 0; it < cfg.inner_max_iter; ++it) {
    const Vec grad = H * y - b;
    Vec xn(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      xn(j) = reg.scalar_prox(1.0, y(j) - step * grad(j), step * t);
    }
    change = (xn - x).cwiseAbs().maxCoeff();
    const bool done = change <= cfg.inner_tol * (1.0 + xn.cwiseAbs().maxCoeff());
    // Gradient-based restart: drop momentum once it points uphill.
    if ((y - xn).dot(xn - x) > 0.0) {
      theta = 1.0;
      y = xn;
    } else {
      const double theta_n = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = xn + ((theta - 1.0) / theta_n) * (xn - x);
      theta = theta_n;
    }
    x = std::move(xn);
    if (done) return x;
  }
  std::ostringstream os;
  os << "accelerated proximal gradient did not converge in " << cfg.inner_max_iter
     << " iterations (last change " << change << ")";
  throw Error(os.str());
}

}  // namespace

Vec solve_penalized_quadratic(const Mat& H, const Vec& b, const Regularizer& reg, double t,
                              const SolverConfig& cfg, const Vec* x0) {
  const Eigen::Index d = H.rows();
  if (H.cols() != d || b.size() != d) throw Error("penalized quadratic: dimension mismatch");
  if (!(t >= 0) || is_infinite(t)) throw Error("penalized quadratic: weight must be finite and >= 0");
  if (t == 0.0 || reg.kind == RegKind::None) {
    Eigen::LDLT<Mat> ldlt(H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 0.0) {
      throw Error(not_pd_message("unpenalized quadratic Hessian", H));
    }
    return ldlt.solve(b);
  }
  if (reg.kind == RegKind::Ridge) {
    Mat A = H;
    A.diagonal().array() += 2.0 * t * reg.scale;
    Eigen::LLT<Mat> llt(A);
    if (llt.info() != Eigen::Success) throw Error(not_pd_message("ridge prox system", A));
    return llt.solve(b);
  }
  if (is_diagonal(H)) {
    Vec x(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      x(j) = H(j, j) > 0 ? reg.scalar_prox(H(j, j), b(j) / H(j, j), t)
                         : flat_coordinate(reg, t, b(j));
    }
    return x;
  }
  Vec start = x0 ? *x0 : Vec::Zero(d);
  if (cfg.prox_method == ProxMethod::AcceleratedGradient) {
    return accelerated_gradient(H, b, reg, t, cfg, std::move(start));
  }
  return coordinate_descent(H, b, reg, t, cfg, std::move(start));
}

Vec generalized_prox(const Mat& H, const Vec& v, const Regularizer& reg, double t,
                     const SolverConfig& cfg) {
  if (H.rows() != v.size()) throw Error("generalized prox: dimension mismatch");
  Eigen::LLT<Mat> llt(H);
  if (llt.info() != Eigen::Success) throw Error(not_pd_message("prox metric", H));
  if (t == 0.0 || reg.kind == RegKind::None) return v;
  return solve_penalized_quadratic(H, H * v, reg, t, cfg, &v);
}

Vec newton_step(const Vec& beta0, const Vec& grad, const Mat& hess) {
  Eigen::LLT<Mat> llt(hess);
  if (llt.info() != Eigen::Success) throw Error(not_pd_message("Newton Hessian", hess));
  return beta0 - llt.solve(grad);
}

Vec prox_newton_step(const Vec& beta0, const Vec& grad_loss, const Mat& hess_loss,
                     const Regularizer& reg, double lambda, const SolverConfig& cfg) {
  const Vec target = newton_step(beta0, grad_loss, hess_loss);
  return generalized_prox(hess_loss, target, reg, lambda, cfg);
}

namespace {

// Proximal-gradient residual with unit step and identity metric.
double prox_residual(const Regularizer& reg, double lambda, const Vec& beta, const Vec& grad) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double p = reg.scalar_prox(1.0, beta(j) - grad(j), lambda);
    s += (beta(j) - p) * (beta(j) - p);
  }
  return std::sqrt(s);
}

bool armijo_ok(double f_new, double f0, double t, double slope, const SolverConfig& cfg) {
  // The additive term absorbs rounding once the decrease is at machine level.
  const double eps = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0));
  return f_new <= f0 + cfg.ls_sufficient * t * slope + eps;
}

FitResult fit_smooth(const Model& model, const Dataset& data, const Vec& w, double lambda,
                     const SolverConfig& cfg, Vec beta) {
  FitResult res;
  res.lambda = lambda;
  for (int it = 0; it <= cfg.max_iter; ++it) {
    const ObjectiveEval ev = evaluate(model, data, w, beta, lambda);
    res.residual = ev.gradient.norm();
    res.objective = ev.value;
    res.iterations = it;
    if (res.residual <= cfg.tol_fit) {
      res.converged = true;
      break;
    }
    if (it == cfg.max_iter) break;
    Eigen::LLT<Mat> llt(ev.hessian);
    if (llt.info() != Eigen::Success) throw Error(not_pd_message("objective Hessian", ev.hessian));
    const Vec dir = -llt.solve(ev.gradient);
    const double slope = ev.gradient.dot(dir);
    double t = 1.0;
    while (true) {
      const Vec trial = beta + t * dir;
      const double f = objective_value(model, data, w, trial, lambda);
      if (std::isfinite(f) && armijo_ok(f, ev.value, t, slope, cfg)) break;
      t *= cfg.ls_factor;
      if (t < 1e-20) break;
    }
    if (t < 1e-20) break;
    beta += t * dir;
  }
  res.beta = std::move(beta);
  return res;
}

FitResult fit_proximal(const Model& model, const Dataset& data, const Vec& w, double lambda,
                       const SolverConfig& cfg, Vec beta) {
  FitResult res;
  res.lambda = lambda;
  const Regularizer& reg = model.reg;
  for (int it = 0; it <= cfg.max_iter; ++it) {
    const Vec g = model.loss->gradient(data, w, beta);
    const double f0 = model.loss->value(data, w, beta) + lambda * reg.value(beta);
    res.residual = prox_residual(reg, lambda, beta, g);
    res.objective = f0;
    res.iterations = it;
    if (res.residual <= cfg.tol_fit) {
      res.converged = true;
      break;
    }
    if (it == cfg.max_iter) break;
    Mat H = model.loss->hessian(data, w, beta);
    // A small ridge on the model keeps the subproblem bounded when the loss
    // Hessian is singular; the fixed point of the iteration is unchanged.
    H.diagonal().array() += 1e-8 * std::max(1e-12, H.diagonal().maxCoeff());
    const Vec target = solve_penalized_quadratic(H, H * beta - g, reg, lambda, cfg, &beta);
    const Vec dir = target - beta;
    const double decrease = g.dot(dir) + lambda * (reg.value(target) - reg.value(beta));
    double t = 1.0;
    while (true) {
      const Vec trial = beta + t * dir;
      const double f = model.loss->value(data, w, trial) + lambda * reg.value(trial);
      if (std::isfinite(f) && armijo_ok(f, f0, t, decrease, cfg)) break;
      t *= cfg.ls_factor;
      if (t < 1e-20) break;
    }
    if (t < 1e-20) break;
    beta += t * dir;
  }
  res.beta = std::move(beta);
  return res;
}

}  // namespace

FitResult fit_erm(const Model& model, const Dataset& data, const Vec& w, double lambda,
                  const SolverConfig& cfg, const Vec* warm_start) {
  cfg.validate();
  if (!(lambda >= 0)) throw Error("lambda must be nonnegative");
  const int d = model.param_dim(data);
  if (is_infinite(lambda)) {
    FitResult res;
    res.lambda = lambda;
    res.beta = Vec::Zero(d);
    res.objective = model.loss->value(data, w, res.beta);
    res.converged = true;
    return res;
  }
  Vec beta = warm_start ? *warm_start : Vec::Zero(d);
  if (beta.size() != d) throw Error("warm start has the wrong dimension");
  if (model.reg.smooth() || lambda == 0.0) {
    Model m = model;
    if (!model.reg.smooth()) m.reg = Regularizer::none();
    return fit_smooth(m, data, w, lambda, cfg, std::move(beta));
  }
  return fit_proximal(model, data, w, lambda, cfg, std::move(beta));
}

std::vector<FitResult> fit_path(const Model& model, const Dataset& data, const Vec& w,
                                const std::vector<double>& grid, const SolverConfig& cfg,
                                Exec exec) {
  std::vector<FitResult> out(grid.size());
  if (cfg.warm_start_path) {
    for (size_t k = 0; k < grid.size(); ++k) {
      out[k] = fit_erm(model, data, w, grid[k], cfg, k > 0 ? &out[k - 1].beta : nullptr);
    }
    return out;
  }
  for_each_index(static_cast<int>(grid.size()), exec, [&](int k) {
    out[static_cast<size_t>(k)] = fit_erm(model, data, w, grid[static_cast<size_t>(k)], cfg);
  });
  return out;
}

}  // namespace acvkit
