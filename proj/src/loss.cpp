#include "acvkit/loss.hpp"

#include <algorithm>
#include <cmath>

namespace acvkit {

Vec Loss::third_contraction(const Dataset& data, int i, const Vec& beta, const Vec& v) const {
  return third_matrix(data, i, beta, v) * v;
}

double Loss::value(const Dataset& data, const Vec& w, const Vec& beta) const {
  double s = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    if (w(i) != 0.0) s += w(i) * value(data, i, beta);
  }
  return s;
}

Vec Loss::gradient(const Dataset& data, const Vec& w, const Vec& beta) const {
  Vec g = Vec::Zero(beta.size());
  for (int i = 0; i < data.n(); ++i) {
    if (w(i) != 0.0) g += w(i) * gradient(data, i, beta);
  }
  return g;
}

Mat Loss::hessian(const Dataset& data, const Vec& w, const Vec& beta) const {
  Mat H = Mat::Zero(beta.size(), beta.size());
  for (int i = 0; i < data.n(); ++i) {
    if (w(i) != 0.0) H += w(i) * hessian(data, i, beta);
  }
  return H;
}

Mat Loss::third_matrix(const Dataset& data, const Vec& w, const Vec& beta, const Vec& v) const {
  Mat T = Mat::Zero(beta.size(), beta.size());
  for (int i = 0; i < data.n(); ++i) {
    if (w(i) != 0.0) T += w(i) * third_matrix(data, i, beta, v);
  }
  return T;
}

// ---------------------------------------------------------------------------

QuadraticLoss::QuadraticLoss(Vec metric) : metric_(std::move(metric)) {
  if (metric_.size() > 0 && (metric_.array() <= 0.0).any()) {
    throw Error("quadratic loss metric must be positive");
  }
}

Vec QuadraticLoss::metric_for(int d) const {
  if (metric_.size() == 0) return Vec::Ones(d);
  if (metric_.size() != d) {
    throw Error("quadratic loss metric has dimension " + std::to_string(metric_.size()) +
                " but data has dimension " + std::to_string(d));
  }
  return metric_;
}

double QuadraticLoss::value(const Dataset& data, int i, const Vec& beta) const {
  const Vec a = metric_for(data.dim());
  const Vec r = beta - data.X.row(i).transpose();
  return 0.5 * (a.array() * r.array().square()).sum();
}

Vec QuadraticLoss::gradient(const Dataset& data, int i, const Vec& beta) const {
  const Vec a = metric_for(data.dim());
  return a.array() * (beta - data.X.row(i).transpose()).array();
}

Mat QuadraticLoss::hessian(const Dataset& data, int, const Vec&) const {
  return metric_for(data.dim()).asDiagonal();
}

Mat QuadraticLoss::third_matrix(const Dataset& data, int, const Vec&, const Vec&) const {
  return Mat::Zero(data.dim(), data.dim());
}

double QuadraticLoss::value(const Dataset& data, const Vec& w, const Vec& beta) const {
  const Vec a = metric_for(data.dim());
  double s = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    if (w(i) == 0.0) continue;
    const Vec r = beta - data.X.row(i).transpose();
    s += w(i) * 0.5 * (a.array() * r.array().square()).sum();
  }
  return s;
}

Vec QuadraticLoss::gradient(const Dataset& data, const Vec& w, const Vec& beta) const {
  const Vec a = metric_for(data.dim());
  const Vec mean = data.X.transpose() * w;
  return a.array() * (w.sum() * beta - mean).array();
}

Mat QuadraticLoss::hessian(const Dataset& data, const Vec& w, const Vec&) const {
  return (w.sum() * metric_for(data.dim())).asDiagonal();
}

Mat QuadraticLoss::third_matrix(const Dataset& data, const Vec&, const Vec&, const Vec&) const {
  return Mat::Zero(data.dim(), data.dim());
}

std::optional<double> QuadraticLoss::gradient_lipschitz(const Dataset& data, int) const {
  return metric_for(data.dim()).maxCoeff();
}

std::optional<double> QuadraticLoss::hessian_bound(const Dataset& data) const {
  return metric_for(data.dim()).maxCoeff();
}

std::optional<double> QuadraticLoss::derivative_lipschitz(const Dataset&, int) const {
  return 0.0;
}

// ---------------------------------------------------------------------------

namespace {

double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// max |psi'''| and max |psi''''| for the logistic link.
const double kLogisticPsi3Max = 1.0 / (6.0 * std::sqrt(3.0));
const double kLogisticPsi4Max = 1.0 / 8.0;

}  // namespace

GlmLoss::GlmLoss(GlmLink link) : link_(link) {}

std::string GlmLoss::name() const {
  return link_ == GlmLink::Logistic ? "logistic" : "exponential";
}

double GlmLoss::psi(double eta) const {
  if (link_ == GlmLink::Exponential) return std::exp(eta);
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double GlmLoss::psi1(double eta) const {
  if (link_ == GlmLink::Exponential) return std::exp(eta);
  return sigmoid(eta);
}

double GlmLoss::psi2(double eta) const {
  if (link_ == GlmLink::Exponential) return std::exp(eta);
  const double s = sigmoid(eta);
  return s * (1.0 - s);
}

double GlmLoss::psi3(double eta) const {
  if (link_ == GlmLink::Exponential) return std::exp(eta);
  const double s = sigmoid(eta);
  return s * (1.0 - s) * (1.0 - 2.0 * s);
}

double GlmLoss::psi4(double eta) const {
  if (link_ == GlmLink::Exponential) return std::exp(eta);
  const double s = sigmoid(eta);
  return s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s);
}

double GlmLoss::value(const Dataset& data, int i, const Vec& beta) const {
  const double eta = data.X.row(i).dot(beta);
  return psi(eta) - data.y(i) * eta;
}

Vec GlmLoss::gradient(const Dataset& data, int i, const Vec& beta) const {
  const double eta = data.X.row(i).dot(beta);
  return (psi1(eta) - data.y(i)) * data.X.row(i).transpose();
}

Mat GlmLoss::hessian(const Dataset& data, int i, const Vec& beta) const {
  const Vec x = data.X.row(i).transpose();
  return psi2(x.dot(beta)) * x * x.transpose();
}

Mat GlmLoss::third_matrix(const Dataset& data, int i, const Vec& beta, const Vec& v) const {
  const Vec x = data.X.row(i).transpose();
  return psi3(x.dot(beta)) * x.dot(v) * x * x.transpose();
}

double GlmLoss::value(const Dataset& data, const Vec& w, const Vec& beta) const {
  const Vec eta = data.X * beta;
  double s = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    if (w(i) != 0.0) s += w(i) * (psi(eta(i)) - data.y(i) * eta(i));
  }
  return s;
}

Vec GlmLoss::gradient(const Dataset& data, const Vec& w, const Vec& beta) const {
  const Vec eta = data.X * beta;
  Vec r(data.n());
  for (int i = 0; i < data.n(); ++i) r(i) = w(i) != 0.0 ? w(i) * (psi1(eta(i)) - data.y(i)) : 0.0;
  return data.X.transpose() * r;
}

Mat GlmLoss::hessian(const Dataset& data, const Vec& w, const Vec& beta) const {
  const Vec eta = data.X * beta;
  Vec d(data.n());
  for (int i = 0; i < data.n(); ++i) d(i) = w(i) != 0.0 ? w(i) * psi2(eta(i)) : 0.0;
  Mat DX = d.asDiagonal() * data.X;
  return data.X.transpose() * DX;
}

Mat GlmLoss::third_matrix(const Dataset& data, const Vec& w, const Vec& beta, const Vec& v) const {
  const Vec eta = data.X * beta;
  const Vec xv = data.X * v;
  Vec d(data.n());
  for (int i = 0; i < data.n(); ++i) d(i) = w(i) != 0.0 ? w(i) * psi3(eta(i)) * xv(i) : 0.0;
  Mat DX = d.asDiagonal() * data.X;
  return data.X.transpose() * DX;
}

std::optional<double> GlmLoss::gradient_lipschitz(const Dataset& data, int i) const {
  if (link_ != GlmLink::Logistic) return std::nullopt;
  return 0.25 * data.X.row(i).squaredNorm();
}

std::optional<double> GlmLoss::hessian_bound(const Dataset& data) const {
  if (link_ != GlmLink::Logistic) return std::nullopt;
  const Mat G = data.X.transpose() * data.X / data.n();
  Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
  return 0.25 * es.eigenvalues().maxCoeff();
}

std::optional<double> GlmLoss::derivative_lipschitz(const Dataset& data, int order) const {
  if (link_ != GlmLink::Logistic) return std::nullopt;
  if (order != 3 && order != 4) throw Error("derivative_lipschitz supports orders 3 and 4");
  const Vec norms = data.X.rowwise().norm();
  const Vec powers = norms.array().pow(order);
  // Lip of D^{order-1} l(P_{-i}, .) <= max|psi^{(order)}| (1/n) sum_{j != i} ||x_j||^order,
  // largest when the smallest-norm point is the one left out.
  const double worst = (powers.sum() - powers.minCoeff()) / data.n();
  return (order == 3 ? kLogisticPsi3Max : kLogisticPsi4Max) * worst;
}

// ---------------------------------------------------------------------------

CustomScalarLoss::CustomScalarLoss(ScalarCallbacks cb) : cb_(std::move(cb)) {
  if (!cb_.f || !cb_.df || !cb_.d2f || !cb_.d3f) {
    throw Error("custom loss needs value and first three derivative callbacks");
  }
}

double CustomScalarLoss::value(const Dataset& data, int i, const Vec& beta) const {
  return cb_.f(data.X(i, 0), beta(0));
}

Vec CustomScalarLoss::gradient(const Dataset& data, int i, const Vec& beta) const {
  return Vec::Constant(1, cb_.df(data.X(i, 0), beta(0)));
}

Mat CustomScalarLoss::hessian(const Dataset& data, int i, const Vec& beta) const {
  return Mat::Constant(1, 1, cb_.d2f(data.X(i, 0), beta(0)));
}

Mat CustomScalarLoss::third_matrix(const Dataset& data, int i, const Vec& beta,
                                   const Vec& v) const {
  return Mat::Constant(1, 1, cb_.d3f(data.X(i, 0), beta(0)) * v(0));
}

std::optional<double> CustomScalarLoss::gradient_lipschitz(const Dataset&, int) const {
  return cb_.gradient_lipschitz;
}

std::optional<double> CustomScalarLoss::hessian_bound(const Dataset&) const {
  return cb_.hessian_bound;
}

std::optional<double> CustomScalarLoss::derivative_lipschitz(const Dataset&, int order) const {
  return order == 3 ? cb_.hessian_lipschitz : cb_.third_lipschitz;
}

}  // namespace acvkit
