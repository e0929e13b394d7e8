#include "acvkit/model.hpp"

namespace acvkit {

namespace {

void check_dims(const Model& model, const Dataset& data, const Vec& w, const Vec& beta) {
  if (!model.loss) throw Error("model has no loss");
  if (w.size() != data.n()) {
    throw Error("weight vector has length " + std::to_string(w.size()) + ", expected " +
                std::to_string(data.n()));
  }
  const int d = model.param_dim(data);
  if (beta.size() != d) {
    throw Error("parameter has dimension " + std::to_string(beta.size()) + ", expected " +
                std::to_string(d));
  }
}

}  // namespace

ObjectiveEval evaluate(const Model& model, const Dataset& data, const Vec& w, const Vec& beta,
                       double lambda) {
  check_dims(model, data, w, beta);
  if (is_infinite(lambda)) throw Error("evaluate requires a finite lambda");
  if (!(lambda >= 0)) throw Error("lambda must be nonnegative");
  ObjectiveEval out;
  out.value = model.loss->value(data, w, beta) + lambda * model.reg.value(beta);
  out.gradient = model.loss->gradient(data, w, beta);
  out.hessian = model.loss->hessian(data, w, beta);
  out.regularizer_included = model.reg.smooth();
  if (out.regularizer_included && lambda != 0.0) {
    out.gradient += lambda * model.reg.gradient(beta);
    out.hessian.diagonal() += lambda * model.reg.hessian_diag(beta);
  }
  return out;
}

double objective_value(const Model& model, const Dataset& data, const Vec& w, const Vec& beta,
                       double lambda) {
  check_dims(model, data, w, beta);
  if (is_infinite(lambda)) throw Error("objective_value requires a finite lambda");
  return model.loss->value(data, w, beta) + (lambda == 0.0 ? 0.0 : lambda * model.reg.value(beta));
}

}  // namespace acvkit
