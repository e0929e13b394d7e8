#pragma once

// Shared by the ACV_p and ProxACV_p implementations.

#include "acvkit/acv.hpp"

#include <cmath>
#include <functional>

namespace acvkit::detail {

// Taylor model about beta_hat in the displacement delta:
//   g.delta + 1/2 delta'H delta + [p = 3] 1/6 T[delta]^3 + [reg] Lip/(p+1) |delta|^{p+1}.
// T[delta] is supplied as a callback returning the matrix contraction.
struct TaylorModel {
  int p = 2;
  Vec g;
  Mat H;
  std::function<Mat(const Vec&)> third;
  double lip = 0.0;  // 0 when unregularized

  double value(const Vec& d) const {
    double v = g.dot(d) + 0.5 * d.dot(H * d);
    if (p == 3) v += (third(d) * d).dot(d) / 6.0;
    if (lip > 0) v += lip / (p + 1) * std::pow(d.norm(), p + 1);
    return v;
  }

  void grad_hess(const Vec& d, Vec& grad, Mat& hess) const {
    grad = g + H * d;
    hess = H;
    if (p == 3) {
      const Mat T = third(d);
      grad += 0.5 * T * d;
      hess += T;
    }
    if (lip > 0) {
      const double r = d.norm();
      if (p == 2) {
        grad += lip * r * d;
        if (r > 0) {
          hess.diagonal().array() += lip * r;
          hess += lip / r * d * d.transpose();
        }
      } else {
        grad += lip * r * r * d;
        hess.diagonal().array() += lip * r * r;
        hess += 2 * lip * d * d.transpose();
      }
    }
  }
};

// Lipschitz constant for the regularizing term: the override if given, else
// C_{l,p+1} (+ lambda C_{pi,p+1} unless loss_only).
double taylor_lipschitz(const Model& model, const Dataset& data, double lambda,
                        const TaylorOptions& opts, bool loss_only);

// Newton with backtracking on the model, started at d. fold only labels errors.
Vec minimize_taylor(const TaylorModel& m, Vec d, const TaylorOptions& opts, int fold);

}  // namespace acvkit::detail
