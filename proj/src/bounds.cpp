#include "acvkit/bounds.hpp"

#include "taylor_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace acvkit {

// ---------------------------------------------------------------------------
// Moments

namespace {

void require_L(const ConstantSet& cs, int n) {
  if (cs.L.size() != n) throw Error("moment bound: per-point Lipschitz constants missing");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(cs.L(i))) {
      throw Error("moment bound: per-point Lipschitz constant L_" + std::to_string(i) +
                  " is unknown");
    }
  }
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= x;
  return r;
}

double moment_at(const Model& model, const Dataset& data, int s, int r, const Vec& beta,
                 const ConstantSet& cs) {
  double sum = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    sum += ipow(cs.L(i), s) * ipow(model.loss->gradient(data, i, beta).norm(), r);
  }
  return sum / data.n();
}

}  // namespace

MomentEstimate moment_bound(const Model& model, const Dataset& data, int s, int r,
                            const std::vector<FitResult>& fits, const ConstantSet& cs) {
  if (s < 0 || r < 0) throw Error("moment orders must be nonnegative");
  require_L(cs, data.n());
  MomentEstimate m{s, r, 0.0, "grid-sup"};
  for (const auto& f : fits) m.value = std::max(m.value, moment_at(model, data, s, r, f.beta, cs));
  return m;
}

MomentEstimate moment_sufficient_bound(const Model& model, const Dataset& data, int s, int r,
                                       const ConstantSet& cs) {
  require_L(cs, data.n());
  if (!(cs.c_m > 0)) throw Error("sufficient moment bound needs c_m > 0");
  const int n = data.n();
  const Vec b_inf = Vec::Zero(model.param_dim(data));
  const double gbar = model.loss->gradient(data, full_weights(n), b_inf).norm();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double gi = model.loss->gradient(data, i, b_inf).norm();
    const double term = gi + (n - 1.0) / n * cs.L(i) / cs.c_m * gbar;
    sum += ipow(cs.L(i), s) * ipow(term, r);
  }
  return {s, r, sum / n, "sufficient"};
}

double Moments::get(int s, int r) const {
  const auto it = values_.find({s, r});
  if (it == values_.end()) {
    throw Error("moment M_{" + std::to_string(s) + "," + std::to_string(r) + "} not computed");
  }
  return it->second;
}

Moments grid_moments(const Model& model, const Dataset& data, const std::vector<FitResult>& fits,
                     const ConstantSet& cs, const std::vector<std::pair<int, int>>& which) {
  Moments m;
  for (const auto& [s, r] : which) {
    if (!m.has(s, r)) m.set(s, r, moment_bound(model, data, s, r, fits, cs).value);
  }
  return m;
}

// ---------------------------------------------------------------------------
// kappa

namespace {

double factorial(int p) {
  double f = 1.0;
  for (int k = 2; k <= p; ++k) f *= k;
  return f;
}

double order_constant(const ConstantSet& cs, int order, bool loss) {
  switch (order) {
    case 2: return loss ? cs.C_ell_2 : cs.C_pi_2;
    case 3: return loss ? cs.C_ell_3 : cs.C_pi_3;
    case 4: return loss ? cs.C_ell_4 : cs.C_pi_4;
    default: throw Error("kappa supports p in {1, 2, 3}");
  }
}

// a * b with 0 * inf = 0: a vanishing constant kills the term regardless of
// how large its partner is.
double mul(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

}  // namespace

double kappa_ratio(int p, const ConstantSet& cs, double lambda) {
  const double cl = order_constant(cs, p + 1, true);
  const double cp = order_constant(cs, p + 1, false);
  const double num = cl + mul(lambda, cp);
  if (num == 0.0) return 0.0;
  const double den = factorial(p) * cs.c_lambda(lambda);
  if (!(den > 0)) return kInfinity;
  return num / den;
}

double kappa(int p, const ConstantSet& cs, const std::vector<double>& grid) {
  double k = 0.0;
  auto consider = [&](double lambda) {
    if (!is_infinite(lambda)) k = std::max(k, kappa_ratio(p, cs, lambda));
  };
  consider(0.0);
  consider(cs.lambda_pi);
  for (double l : grid) consider(l);
  // lambda -> infinity limit.
  const double cp = order_constant(cs, p + 1, false);
  if (cs.c_pi > 0) {
    k = std::max(k, cp / (factorial(p) * cs.c_pi));
  } else if (cp > 0) {
    k = kInfinity;
  }
  return k;
}

// ---------------------------------------------------------------------------
// Bound formulas

namespace {

void require_c(double c) {
  if (!(c > 0)) throw Error("bound evaluation needs a positive curvature constant");
}

}  // namespace

double thm1_bound(double kappa2, double M03, double M13, double M14, double c, int n) {
  require_c(c);
  const double nn = n;
  return mul(kappa2, M03) / (nn * nn * c * c) + mul(kappa2, M13) / (nn * nn * nn * c * c * c) +
         mul(mul(kappa2, kappa2), M14) / (2 * ipow(nn, 4) * ipow(c, 4));
}

double thm2_bound(double M12, double M22, double M32, double c, int n) {
  require_c(c);
  const double nn = n;
  return M12 / (c * c * nn * nn) + M22 / (ipow(c, 3) * ipow(nn, 3)) +
         M32 / (2 * ipow(c, 4) * ipow(nn, 4));
}

double thm3_bound(int p, double kappa_p, double M0p1, double M1p1, double M12p, double c, int n) {
  require_c(c);
  const double nn = n;
  const double inner = M0p1 / ipow(c, p) + M1p1 / (nn * ipow(c, p + 1)) +
                       mul(kappa_p, M12p) / (ipow(nn, p) * ipow(c, 2 * p));
  return mul(2 * kappa_p / ipow(nn, p), inner);
}

double thm6_bound(double C3, double M03, double M13, double M14, double c, int n) {
  require_c(c);
  const double nn = n;
  const double inner = M03 / (2 * ipow(c, 3)) + M13 / (2 * nn * ipow(c, 4)) +
                       mul(C3, M14) / (8 * nn * nn * ipow(c, 6));
  return mul(C3 / (nn * nn), inner);
}

double thm7_bound(double M12, double M22, double M32, double c, int n) {
  return thm2_bound(M12, M22, M32, c, n);
}

double assessment_bound(Assessment kind, const ConstantSet& cs, const Moments& m, int n,
                        double lambda, int p) {
  switch (kind) {
    case Assessment::Thm1:
      return thm1_bound(kappa(2, cs, cs.grid), m.get(0, 3), m.get(1, 3), m.get(1, 4), cs.c_m, n);
    case Assessment::Thm2:
      return thm2_bound(m.get(1, 2), m.get(2, 2), m.get(3, 2), cs.c_lambda(lambda), n);
    case Assessment::Thm3:
      return thm3_bound(p, kappa(p, cs, cs.grid), m.get(0, p + 1), m.get(1, p + 1),
                        m.get(1, 2 * p), cs.c_lambda(lambda), n);
    case Assessment::Thm6:
      return thm6_bound(cs.C_ell_3, m.get(0, 3), m.get(1, 3), m.get(1, 4), cs.c_m, n);
    case Assessment::Thm7:
      return thm7_bound(m.get(1, 2), m.get(2, 2), m.get(3, 2), cs.c_m, n);
  }
  throw Error("unknown assessment bound");
}

double thm1_A2(double kappa2, double M03, double M13, double M14, double c, int n) {
  require_c(c);
  const double nn = n;
  return 2 * (mul(kappa2, M03) / (c * c) + mul(kappa2, M13) / (nn * ipow(c, 3)) +
              mul(mul(kappa2, kappa2), M14) / (2 * nn * nn * ipow(c, 4)));
}

double thm8_A_tilde(double C3, double M03, double M13, double M14, double c, int n) {
  require_c(c);
  const double nn = n;
  const double inner = M03 / ipow(c, 3) + M13 / (nn * ipow(c, 4)) +
                       mul(C3, M14) / (4 * nn * nn * ipow(c, 6));
  return mul(C3 / (nn * nn), inner);
}

double thm4_rhs(double M02, double M12, double A2, double c_m, double c_ell, int n) {
  require_c(c_m);
  require_c(c_ell);
  const double nn = n;
  return (8 / c_m) * (M02 / (c_ell * nn) + (A2 * c_m * c_m + M12) / (4 * c_m * c_m * nn * nn));
}

double thm5_rhs(double A, double A1, double A2, double c_m, int n) {
  require_c(c_m);
  const double nn = n;
  return (A * A + 2 * c_m * A1 + 2 * c_m * A2) / (nn * nn * c_m * c_m);
}

double thm8_rhs(double M02, double M12, double A_tilde, double c_m, int n) {
  require_c(c_m);
  const double nn = n;
  return (2 / (nn * c_m)) * (4 * M02 / c_m + M12 / (nn * c_m * c_m) + A_tilde);
}

SelectionQuantities selection_bound(Selection kind, const ConstantSet& cs, const Moments& m,
                                    int n) {
  SelectionQuantities q;
  const double c = cs.c_m;
  switch (kind) {
    case Selection::Thm4: {
      q.A2 = thm1_A2(kappa(2, cs, cs.grid), m.get(0, 3), m.get(1, 3), m.get(1, 4), c, n);
      q.rhs = thm4_rhs(m.get(0, 2), m.get(1, 2), q.A2, c, cs.c_ell, n);
      return q;
    }
    case Selection::Thm5: {
      if (!(cs.grad_reg_at_est0 > 0)) {
        throw Error("strong selection bound needs ||grad pi(beta_hat(0))|| > 0");
      }
      require_c(cs.c_ell);
      const double k1 = kappa(1, cs, cs.grid);
      const double k2 = kappa(2, cs, cs.grid);
      q.A2 = thm1_A2(k2, m.get(0, 3), m.get(1, 3), m.get(1, 4), c, n);
      q.A = (m.get(1, 1) + mul(m.get(0, 2), k2)) / (cs.c_ell / 2) +
            mul(mul(m.get(0, 2), cs.C_pi_2), k1 * k1) / (cs.grad_reg_at_est0 * c);
      q.A1 = m.get(1, 2) / (c * c);
      q.center = q.A / (n * c);
      q.rhs = thm5_rhs(q.A, q.A1, q.A2, c, n);
      return q;
    }
    case Selection::Thm8: {
      q.A_tilde = thm8_A_tilde(cs.C_ell_3, m.get(0, 3), m.get(1, 3), m.get(1, 4), c, n);
      q.rhs = thm8_rhs(m.get(0, 2), m.get(1, 2), q.A_tilde, c, n);
      return q;
    }
  }
  throw Error("unknown selection bound");
}

// ---------------------------------------------------------------------------
// Optimizer comparison checks

double QuadraticObjective::value(const Vec& x) const {
  const Vec d = x - center;
  return 0.5 * d.dot(Q * d) + offset;
}

Vec QuadraticObjective::gradient(const Vec& x) const { return Q * (x - center); }

double errorbound_residual(const QuadraticObjective& phi1, const QuadraticObjective& phi2) {
  const Vec& x1 = phi1.center;
  const Vec& x2 = phi2.center;
  const double r2 = (x1 - x2).squaredNorm();
  const double lhs = 0.5 * min_eigenvalue(phi1.Q) * r2 + 0.5 * min_eigenvalue(phi2.Q) * r2;
  const double rhs = phi2.value(x1) - phi1.value(x1) - (phi2.value(x2) - phi1.value(x2));
  return lhs - rhs;
}

double growth_residual(const QuadraticObjective& phi1, const QuadraticObjective& phi2) {
  const Vec& x1 = phi1.center;
  const Vec& x2 = phi2.center;
  const double lhs = min_eigenvalue(phi2.Q) * (x1 - x2).squaredNorm();
  const Vec diff_grad = phi2.gradient(x1) - phi1.gradient(x1);
  return lhs - (x1 - x2).dot(diff_grad);
}

namespace {

double softplus(double u) { return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }
double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

struct SoftplusEval {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

// phi alone (without phi0).
SoftplusEval softplus_eval(const SoftplusInstance& inst, const Vec& x) {
  const Eigen::Index m = inst.A.rows();
  const Vec u = inst.A * x - inst.b;
  SoftplusEval e;
  Vec s1(m);
  Vec s2(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    e.value += softplus(u(j));
    s1(j) = sigmoid(u(j));
    s2(j) = s1(j) * (1 - s1(j));
  }
  e.value /= m;
  e.grad = inst.A.transpose() * s1 / m;
  e.hess = inst.A.transpose() * s2.asDiagonal() * inst.A / m;
  return e;
}

Vec softplus_minimizer(const SoftplusInstance& inst) {
  Vec x = inst.c;
  for (int it = 0; it < 200; ++it) {
    const SoftplusEval e = softplus_eval(inst, x);
    const Vec g = e.grad + inst.mu0 * (x - inst.c);
    if (g.norm() <= 1e-13) break;
    Mat H = e.hess;
    H.diagonal().array() += inst.mu0;
    const Vec step = -H.llt().solve(g);
    auto F = [&](const Vec& y) {
      return softplus_eval(inst, y).value + 0.5 * inst.mu0 * (y - inst.c).squaredNorm();
    };
    const double f0 = F(x);
    double t = 1.0;
    while (t > 1e-12 && F(x + t * step) > f0 + 1e-4 * t * g.dot(step) + 1e-15 * (1 + std::abs(f0))) {
      t *= 0.5;
    }
    x += t * step;
  }
  return x;
}

}  // namespace

double taylor_residual(const SoftplusInstance& inst, const Vec& w, bool regularized) {
  double lip = 0.0;
  for (Eigen::Index j = 0; j < inst.A.rows(); ++j) lip += std::pow(inst.A.row(j).norm(), 3);
  lip *= 1.0 / (6.0 * std::sqrt(3.0)) / inst.A.rows();

  const Vec x_phi = softplus_minimizer(inst);
  const SoftplusEval e = softplus_eval(inst, w);
  // Second-order model of phi about w plus phi0, in the displacement d = x - w.
  detail::TaylorModel model;
  model.p = 2;
  model.g = e.grad + inst.mu0 * (w - inst.c);
  model.H = e.hess;
  model.H.diagonal().array() += inst.mu0;
  // TaylorModel carries lip/(p+1) |d|^{p+1}; the comparison uses Lip/(p+1)!.
  model.lip = regularized ? lip / 2.0 : 0.0;
  const double mu = min_eigenvalue(model.H);
  Vec d = model.H.llt().solve(-model.g);
  if (regularized) {
    TaylorOptions opts;
    opts.p = 2;
    opts.tol = 1e-14;
    opts.max_iter = 200;
    d = detail::minimize_taylor(model, d, opts, 0);
  }
  const Vec x_hat = w + d;
  const double factor = regularized ? 2.0 : 1.0;
  return (x_phi - x_hat).norm() - factor * lip / (mu * 2.0) * (x_phi - w).squaredNorm();
}

double proxnewton_residual(const Vec& beta, const Vec& g, const Mat& H, const Mat& Ht,
                           const Regularizer& reg, double t, const SolverConfig& cfg) {
  const Vec bH = prox_newton_step(beta, g, H, reg, t, cfg);
  const Vec bHt = prox_newton_step(beta, g, Ht, reg, t, cfg);
  const double mu = min_eigenvalue(Ht);
  if (!(mu > 0)) throw Error("proximal Newton comparison needs a positive definite metric");
  return (bH - bHt).norm() - ((Ht - H) * (bH - beta)).norm() / mu;
}

LemmaResiduals lemma_residuals(const QuadraticObjective& phi1, const QuadraticObjective& phi2,
                               const SoftplusInstance& taylor, const Vec& w, double t,
                               const SolverConfig& cfg) {
  LemmaResiduals r;
  r.errorbound = errorbound_residual(phi1, phi2);
  r.growth = growth_residual(phi1, phi2);
  r.taylor = std::max(taylor_residual(taylor, w, false), taylor_residual(taylor, w, true));
  const Vec beta = Vec::Zero(phi1.center.size());
  r.proxnewton =
      proxnewton_residual(beta, phi1.gradient(beta), phi1.Q, phi2.Q, Regularizer::l1(), t, cfg);
  return r;
}

}  // namespace acvkit
