#pragma once

#include "acvkit/dataset.hpp"
#include "acvkit/loss.hpp"
#include "acvkit/regularizer.hpp"

#include <memory>

namespace acvkit {

// Objective m(z, beta, lambda) = l(z, beta) + lambda pi(beta).
struct Model {
  LossPtr loss;
  Regularizer reg;

  int param_dim(const Dataset& data) const { return loss->param_dim(data); }
};

struct ObjectiveEval {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
  // False when the regularizer is non-smooth: gradient and hessian then cover
  // the loss part only.
  bool regularizer_included = true;
};

// value = sum_i w_i l(z_i, beta) + lambda pi(beta) with the matching gradient
// and Hessian. lambda must be finite.
ObjectiveEval evaluate(const Model& model, const Dataset& data, const Vec& w, const Vec& beta,
                       double lambda);

// Objective value only; cheaper than evaluate.
double objective_value(const Model& model, const Dataset& data, const Vec& w, const Vec& beta,
                       double lambda);

}  // namespace acvkit
