#include "acvkit/regularizer.hpp"

#include <algorithm>
#include <cmath>

namespace acvkit {

namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

Regularizer Regularizer::none() { return {RegKind::None, 1.0, 1.0, 0.5}; }
Regularizer Regularizer::ridge(double scale) {
  if (!(scale > 0)) throw Error("ridge scale must be positive");
  return {RegKind::Ridge, scale, 1.0, 0.5};
}
Regularizer Regularizer::l1() { return {RegKind::L1, 1.0, 1.0, 0.5}; }
Regularizer Regularizer::elastic_net(double alpha) {
  if (!(alpha >= 0 && alpha <= 1)) throw Error("elastic net alpha must lie in [0, 1]");
  return {RegKind::ElasticNet, 1.0, 1.0, alpha};
}
Regularizer Regularizer::pseudo_huber(double delta) {
  if (!(delta > 0)) throw Error("pseudo-Huber delta must be positive");
  return {RegKind::PseudoHuber, 1.0, delta, 0.5};
}
Regularizer Regularizer::patched_lasso(double delta) {
  if (!(delta > 0)) throw Error("patched-Lasso delta must be positive");
  return {RegKind::PatchedLasso, 1.0, delta, 0.5};
}

std::string Regularizer::name() const {
  switch (kind) {
    case RegKind::None: return "none";
    case RegKind::Ridge: return "ridge";
    case RegKind::L1: return "l1";
    case RegKind::ElasticNet: return "elastic_net";
    case RegKind::PseudoHuber: return "pseudo_huber";
    case RegKind::PatchedLasso: return "patched_lasso";
  }
  return "unknown";
}

bool Regularizer::smooth() const {
  return kind != RegKind::L1 && !(kind == RegKind::ElasticNet && alpha > 0);
}

double Regularizer::value1(double b) const {
  switch (kind) {
    case RegKind::None: return 0.0;
    case RegKind::Ridge: return scale * b * b;
    case RegKind::L1: return std::abs(b);
    case RegKind::ElasticNet: return alpha * std::abs(b) + 0.5 * (1 - alpha) * b * b;
    case RegKind::PseudoHuber: {
      const double u = b / delta;
      return delta * delta * (std::sqrt(1 + u * u) - 1);
    }
    case RegKind::PatchedLasso:
      return std::abs(b) < delta ? 0.5 * delta + b * b / (2 * delta) : std::abs(b);
  }
  return 0.0;
}

double Regularizer::grad1(double b) const {
  switch (kind) {
    case RegKind::None: return 0.0;
    case RegKind::Ridge: return 2 * scale * b;
    case RegKind::L1:
    case RegKind::ElasticNet:
      if (kind == RegKind::ElasticNet && alpha == 0) return b;
      throw Error(name() + " penalty has no gradient; use a proximal method");
    case RegKind::PseudoHuber: {
      const double u = b / delta;
      return b / std::sqrt(1 + u * u);
    }
    case RegKind::PatchedLasso: return std::abs(b) < delta ? b / delta : sign(b);
  }
  return 0.0;
}

double Regularizer::hess1(double b) const {
  switch (kind) {
    case RegKind::None: return 0.0;
    case RegKind::Ridge: return 2 * scale;
    case RegKind::L1: return 0.0;
    case RegKind::ElasticNet: return 1 - alpha;
    case RegKind::PseudoHuber: {
      const double u = b / delta;
      return std::pow(1 + u * u, -1.5);
    }
    case RegKind::PatchedLasso:
      // At the seam |b| = delta the |b| branch is used.
      return std::abs(b) < delta * (1 - 1e-9) ? 1.0 / delta : 0.0;
  }
  return 0.0;
}

double Regularizer::third1(double b) const {
  if (kind != RegKind::PseudoHuber) return 0.0;
  const double u = b / delta;
  return -3.0 * u / delta * std::pow(1 + u * u, -2.5);
}

double Regularizer::value(const Vec& beta) const {
  double s = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) s += value1(beta(j));
  return s;
}

Vec Regularizer::gradient(const Vec& beta) const {
  Vec g(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) g(j) = grad1(beta(j));
  return g;
}

Vec Regularizer::hessian_diag(const Vec& beta) const {
  Vec h(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) h(j) = hess1(beta(j));
  return h;
}

Vec Regularizer::third_diag(const Vec& beta) const {
  Vec h(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) h(j) = third1(beta(j));
  return h;
}

double Regularizer::scalar_prox(double h, double c, double t) const {
  if (t == 0.0 || kind == RegKind::None) return c;
  switch (kind) {
    case RegKind::None: return c;
    case RegKind::Ridge: return h * c / (h + 2 * t * scale);
    case RegKind::L1: return soft_threshold(c, t / h);
    case RegKind::ElasticNet: return soft_threshold(h * c, t * alpha) / (h + t * (1 - alpha));
    case RegKind::PseudoHuber: {
      // Root of f(x) = h (x - c) + t pi'(x), increasing, bracketed by 0 and c.
      double lo = std::min(0.0, c);
      double hi = std::max(0.0, c);
      double x = h * c / (h + t);
      for (int it = 0; it < 200; ++it) {
        const double f = h * (x - c) + t * grad1(x);
        if (f > 0) hi = x; else lo = x;
        const double fp = h + t * hess1(x);
        double next = x - f / fp;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-16 * (1 + std::abs(x))) return next;
        x = next;
      }
      return x;
    }
    case RegKind::PatchedLasso: {
      auto obj = [&](double x) { return 0.5 * h * (x - c) * (x - c) + t * value1(x); };
      double best = 0.0;
      double best_val = kInfinity;
      auto consider = [&](double x) {
        const double v = obj(x);
        if (v < best_val) {
          best_val = v;
          best = x;
        }
      };
      const double xq = h * c / (h + t / delta);
      if (std::abs(xq) < delta) consider(xq);
      const double xp = c - t / h;
      if (xp >= delta) consider(xp);
      const double xm = c + t / h;
      if (xm <= -delta) consider(xm);
      consider(delta);
      consider(-delta);
      return best;
    }
  }
  return c;
}

double Regularizer::curvature() const {
  switch (kind) {
    case RegKind::Ridge: return 2 * scale;
    case RegKind::ElasticNet: return 1 - alpha;
    default: return 0.0;
  }
}

double Regularizer::hessian_bound() const {
  switch (kind) {
    case RegKind::None: return 0.0;
    case RegKind::Ridge: return 2 * scale;
    case RegKind::L1: return 0.0;
    case RegKind::ElasticNet: return 1 - alpha;
    case RegKind::PseudoHuber: return 1.0;
    case RegKind::PatchedLasso: return 1.0 / delta;
  }
  return kInfinity;
}

double Regularizer::derivative_lipschitz(int order) const {
  if (order != 3 && order != 4) throw Error("derivative_lipschitz supports orders 3 and 4");
  switch (kind) {
    case RegKind::PseudoHuber:
      // max_u u (1+u^2)^{-5/2} is attained at u = 1/2; the fourth derivative
      // peaks at u = 0.
      if (order == 3) return 3.0 / delta * 0.5 * std::pow(1.25, -2.5);
      return 3.0 / (delta * delta);
    case RegKind::PatchedLasso: return kInfinity;
    default: return 0.0;
  }
}

}  // namespace acvkit
