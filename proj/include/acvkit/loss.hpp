#pragma once

#include "acvkit/dataset.hpp"
#include "acvkit/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace acvkit {

// A per-point loss l(z_i, beta) with derivative oracles up to third order.
// Third-order tensors are never materialized: third_matrix returns the
// contraction D^3 l[v] (a d x d matrix) and third_contraction returns
// D^3 l[v, v] (a vector).
class Loss {
 public:
  virtual ~Loss() = default;

  virtual std::string name() const = 0;
  virtual int param_dim(const Dataset& data) const = 0;

  virtual double value(const Dataset& data, int i, const Vec& beta) const = 0;
  virtual Vec gradient(const Dataset& data, int i, const Vec& beta) const = 0;
  virtual Mat hessian(const Dataset& data, int i, const Vec& beta) const = 0;
  virtual Mat third_matrix(const Dataset& data, int i, const Vec& beta,
                           const Vec& v) const = 0;
  Vec third_contraction(const Dataset& data, int i, const Vec& beta, const Vec& v) const;

  // Weighted sums over points; points with zero weight are skipped.
  virtual double value(const Dataset& data, const Vec& w, const Vec& beta) const;
  virtual Vec gradient(const Dataset& data, const Vec& w, const Vec& beta) const;
  virtual Mat hessian(const Dataset& data, const Vec& w, const Vec& beta) const;
  virtual Mat third_matrix(const Dataset& data, const Vec& w, const Vec& beta,
                           const Vec& v) const;

  // True when the Hessian does not depend on beta (quadratic losses).
  virtual bool constant_hessian() const { return false; }

  // Lipschitz constant L_i of grad l(z_i, .), if finite and known.
  virtual std::optional<double> gradient_lipschitz(const Dataset& data, int i) const = 0;
  // Uniform bound C_{l,2} on the operator norm of the P_n Hessian.
  virtual std::optional<double> hessian_bound(const Dataset& data) const = 0;
  // C_{l,order}: Lipschitz constant of the (order-1)-th derivative of
  // l(P_{-i}, .), maximized over i. order is 3 or 4.
  virtual std::optional<double> derivative_lipschitz(const Dataset& data, int order) const = 0;
};

using LossPtr = std::shared_ptr<const Loss>;

// l(z, beta) = 1/2 (beta - z)^T diag(metric) (beta - z). An empty metric means
// the identity.
class QuadraticLoss final : public Loss {
 public:
  explicit QuadraticLoss(Vec metric = Vec());

  std::string name() const override { return "quadratic"; }
  int param_dim(const Dataset& data) const override { return data.dim(); }
  double value(const Dataset& data, int i, const Vec& beta) const override;
  Vec gradient(const Dataset& data, int i, const Vec& beta) const override;
  Mat hessian(const Dataset& data, int i, const Vec& beta) const override;
  Mat third_matrix(const Dataset& data, int i, const Vec& beta, const Vec& v) const override;

  double value(const Dataset& data, const Vec& w, const Vec& beta) const override;
  Vec gradient(const Dataset& data, const Vec& w, const Vec& beta) const override;
  Mat hessian(const Dataset& data, const Vec& w, const Vec& beta) const override;
  Mat third_matrix(const Dataset& data, const Vec& w, const Vec& beta,
                   const Vec& v) const override;

  bool constant_hessian() const override { return true; }
  std::optional<double> gradient_lipschitz(const Dataset& data, int i) const override;
  std::optional<double> hessian_bound(const Dataset& data) const override;
  std::optional<double> derivative_lipschitz(const Dataset& data, int order) const override;

  const Vec& metric() const { return metric_; }

 private:
  Vec metric_for(int d) const;
  Vec metric_;
};

enum class GlmLink { Logistic, Exponential };

// Canonical-link GLM: l((x, y), beta) = psi(x^T beta) - y x^T beta.
// Logistic uses psi = log(1 + e^eta) with y in {0, 1}; exponential uses
// psi = e^eta (Poisson log link) with y >= 0.
class GlmLoss final : public Loss {
 public:
  explicit GlmLoss(GlmLink link);

  std::string name() const override;
  int param_dim(const Dataset& data) const override { return data.dim(); }
  double value(const Dataset& data, int i, const Vec& beta) const override;
  Vec gradient(const Dataset& data, int i, const Vec& beta) const override;
  Mat hessian(const Dataset& data, int i, const Vec& beta) const override;
  Mat third_matrix(const Dataset& data, int i, const Vec& beta, const Vec& v) const override;

  double value(const Dataset& data, const Vec& w, const Vec& beta) const override;
  Vec gradient(const Dataset& data, const Vec& w, const Vec& beta) const override;
  Mat hessian(const Dataset& data, const Vec& w, const Vec& beta) const override;
  Mat third_matrix(const Dataset& data, const Vec& w, const Vec& beta,
                   const Vec& v) const override;

  std::optional<double> gradient_lipschitz(const Dataset& data, int i) const override;
  std::optional<double> hessian_bound(const Dataset& data) const override;
  std::optional<double> derivative_lipschitz(const Dataset& data, int order) const override;

  GlmLink link() const { return link_; }

  // psi and its derivatives up to fourth order.
  double psi(double eta) const;
  double psi1(double eta) const;
  double psi2(double eta) const;
  double psi3(double eta) const;
  double psi4(double eta) const;

 private:
  GlmLink link_;
};

// Scalar-parameter loss given by user callbacks f(z, b) and its b-derivatives.
// z is the first column of the data row. Constants are supplied by the user;
// none are estimated numerically.
struct ScalarCallbacks {
  std::function<double(double, double)> f;
  std::function<double(double, double)> df;
  std::function<double(double, double)> d2f;
  std::function<double(double, double)> d3f;
  std::optional<double> gradient_lipschitz;
  std::optional<double> hessian_bound;
  std::optional<double> hessian_lipschitz;
  std::optional<double> third_lipschitz;
};

class CustomScalarLoss final : public Loss {
 public:
  explicit CustomScalarLoss(ScalarCallbacks cb);

  std::string name() const override { return "custom"; }
  int param_dim(const Dataset&) const override { return 1; }
  double value(const Dataset& data, int i, const Vec& beta) const override;
  Vec gradient(const Dataset& data, int i, const Vec& beta) const override;
  Mat hessian(const Dataset& data, int i, const Vec& beta) const override;
  Mat third_matrix(const Dataset& data, int i, const Vec& beta, const Vec& v) const override;

  std::optional<double> gradient_lipschitz(const Dataset& data, int i) const override;
  std::optional<double> hessian_bound(const Dataset& data) const override;
  std::optional<double> derivative_lipschitz(const Dataset& data, int order) const override;

 private:
  ScalarCallbacks cb_;
};

}  // namespace acvkit
