#pragma once

#include "acvkit/constants.hpp"
#include "acvkit/proxacv.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace acvkit {

// M_{s,r} = sup_lambda (1/n) sum_i L_i^s ||grad l(z_i, beta_hat(lambda))||^r.
struct MomentEstimate {
  int s = 0;
  int r = 0;
  double value = 0.0;
  std::string source;  // "grid-sup" or "sufficient"
};

// Grid supremum over the supplied fits.
MomentEstimate moment_bound(const Model& model, const Dataset& data, int s, int r,
                            const std::vector<FitResult>& fits, const ConstantSet& cs);

// Closed-form bound (1/n) sum_i L_i^s (||grad l(z_i, b_inf)|| +
// ((n-1)/n)(L_i/c_m) ||grad l(P_n, b_inf)||)^r with b_inf = argmin pi.
MomentEstimate moment_sufficient_bound(const Model& model, const Dataset& data, int s, int r,
                                       const ConstantSet& cs);

class Moments {
 public:
  void set(int s, int r, double value) { values_[{s, r}] = value; }
  bool has(int s, int r) const { return values_.count({s, r}) > 0; }
  double get(int s, int r) const;
  const std::map<std::pair<int, int>, double>& values() const { return values_; }

 private:
  std::map<std::pair<int, int>, double> values_;
};

Moments grid_moments(const Model& model, const Dataset& data, const std::vector<FitResult>& fits,
                     const ConstantSet& cs, const std::vector<std::pair<int, int>>& which);

// (C_{l,p+1} + lambda C_{pi,p+1}) / (p! (c_ell + lambda c_pi 1{lambda >= lambda_pi})).
double kappa_ratio(int p, const ConstantSet& cs, double lambda);
// Supremum of kappa_ratio over grid plus 0, lambda_pi and the lambda -> inf limit.
double kappa(int p, const ConstantSet& cs, const std::vector<double>& grid);

// Closed-form bound expressions.
double thm1_bound(double kappa2, double M03, double M13, double M14, double c, int n);
double thm2_bound(double M12, double M22, double M32, double c, int n);
double thm3_bound(int p, double kappa_p, double M0p1, double M1p1, double M12p, double c, int n);
double thm6_bound(double C3, double M03, double M13, double M14, double c, int n);
double thm7_bound(double M12, double M22, double M32, double c, int n);

enum class Assessment { Thm1, Thm2, Thm3, Thm6, Thm7 };

// Evaluates an assessment bound at lambda with constants from cs. Thm1 and
// Thm6 use the uniform c_m; Thm2 and Thm3 use c_{lambda,lambda}; Thm7 uses c_m.
double assessment_bound(Assessment kind, const ConstantSet& cs, const Moments& m, int n,
                        double lambda, int p = 2);

struct SelectionQuantities {
  double rhs = 0.0;
  double A = 0.0;
  double A1 = 0.0;  // A'
  double A2 = 0.0;  // A''
  double A_tilde = 0.0;
  double center = 0.0;  // A / (n c_m) for the strong bound
};

enum class Selection { Thm4, Thm5, Thm8 };

double thm1_A2(double kappa2, double M03, double M13, double M14, double c, int n);
double thm8_A_tilde(double C3, double M03, double M13, double M14, double c, int n);
double thm4_rhs(double M02, double M12, double A2, double c_m, double c_ell, int n);
double thm5_rhs(double A, double A1, double A2, double c_m, int n);
double thm8_rhs(double M02, double M12, double A_tilde, double c_m, int n);

// Evaluates the selection bound and its intermediate quantities. Thm5 needs
// ||grad pi(beta_hat(0))|| > 0 and throws otherwise.
SelectionQuantities selection_bound(Selection kind, const ConstantSet& cs, const Moments& m,
                                    int n);

// phi(x) = 1/2 (x - center)^T Q (x - center) + offset.
struct QuadraticObjective {
  Mat Q;
  Vec center;
  double offset = 0.0;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
};

// Left minus right side of the error-bound form of the optimizer comparison
// with nu_k(r) = (mu_k/2) r^2; must be <= 0.
double errorbound_residual(const QuadraticObjective& phi1, const QuadraticObjective& phi2);
// Left minus right side of the gradient-growth form with nu_2(r) = mu_2 r^2.
double growth_residual(const QuadraticObjective& phi1, const QuadraticObjective& phi2);

// Smooth test objective phi(x) = (1/m) sum_j softplus(a_j^T x - b_j) plus
// phi0(x) = (mu0/2) ||x - c||^2, with Lip(Hess phi) <= (1/(6 sqrt 3)) mean ||a_j||^3.
struct SoftplusInstance {
  Mat A;
  Vec b;
  double mu0 = 1.0;
  Vec c;
};

// ||x_phi - x_hat|| - Lip(Hess phi) / (mu 2!) ||x_phi - w||^2 for the second
// order Taylor model about w. With regularized = true the model carries
// (Lip/3!) ||x - w||^3 and the right side doubles.
double taylor_residual(const SoftplusInstance& inst, const Vec& w, bool regularized);

// ||b_H - b_Ht|| - ||(Ht - H)(b_H - beta)|| / lambda_min(Ht) for proximal
// Newton points with penalty t pi.
double proxnewton_residual(const Vec& beta, const Vec& g, const Mat& H, const Mat& Ht,
                           const Regularizer& reg, double t, const SolverConfig& cfg);

struct LemmaResiduals {
  double errorbound = 0.0;
  double growth = 0.0;
  double taylor = 0.0;
  double proxnewton = 0.0;
};

// All four residuals on one instance: the quadratic pair, a softplus Taylor
// instance expanded at w, and proximal Newton points built from the pair's
// Hessians with an l1 penalty of weight t.
LemmaResiduals lemma_residuals(const QuadraticObjective& phi1, const QuadraticObjective& phi2,
                               const SoftplusInstance& taylor, const Vec& w, double t,
                               const SolverConfig& cfg);

// Per-lambda results of every method over one grid.
struct Curves {
  std::vector<double> grid;
  std::vector<FitResult> fits;
  std::vector<CVResult> cv;
  std::map<std::string, std::vector<ApproxResult>> approx;

  bool has(const std::string& method) const { return approx.count(method) > 0; }
};

struct CurveOptions {
  std::vector<std::string> methods;
  FoldScheme scheme;
  SolverConfig solver;
  ProxOptions prox;
  double support_tol = 1e-12;
  Exec exec = Exec::Serial;
};

// Known method names: cv, acv, acv_ij, acv_p3, acv_p3_reg, acv_sr, acv_ij_sr,
// proxacv, proxacv_ij, proxacv_p3, proxacv_p3_reg.
const std::vector<std::string>& known_methods();

Curves compute_curves(const Model& model, const Dataset& data, const std::vector<double>& grid,
                      const CurveOptions& opts);

struct CertificateRow {
  double lambda = 0.0;
  std::string method;
  std::string theorem;
  double gap = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SelectionRecord {
  std::string theorem;
  double lambda_approx = 0.0;
  double lambda_cv = 0.0;
  double observed = 0.0;
  SelectionQuantities q;
  bool evaluated = false;
  bool pass = false;
  std::string note;
};

struct LemmaRecord {
  std::string name;
  long checks = 0;
  long violations = 0;
  double worst = -kInfinity;  // largest observed (lhs - rhs)
};

struct BoundCertificate {
  std::string instance;
  int n = 0;
  ConstantSet constants;
  Moments moments;
  std::map<std::string, double> kappas;
  std::vector<double> kappa2_per_lambda;
  std::vector<CertificateRow> rows;
  std::vector<SelectionRecord> selections;
  std::vector<LemmaRecord> lemmas;
  double slack = 1e-12;
  double lemma_slack = 1e-9;
  bool all_pass = true;
};

struct CertifyOptions {
  // thm1 ... thm8
  std::vector<std::string> theorems;
  bool lemmas = true;
  double slack = 1e-12;
  // Slack for estimator-level lemma checks, which sit at solver precision.
  double lemma_slack = 1e-9;
  ConstantOptions constants;
  std::string instance;
};

// argmin over the grid with ties broken toward the smallest lambda.
int grid_argmin(const std::vector<double>& grid, const std::vector<double>& values);

// Methods that certify() needs in the curves for the requested theorems.
std::vector<std::string> methods_for_theorems(const std::vector<std::string>& theorems);

BoundCertificate certify(const Model& model, const Dataset& data, const Curves& curves,
                         const CurveOptions& curve_opts, const CertifyOptions& opts);

// Stable serializations; certificate_version is 1.
std::string certificate_json(const BoundCertificate& cert);
std::string certificate_csv(const BoundCertificate& cert);

// Re-evaluates every row verdict from its recorded gap and bound.
bool verdicts_consistent(const BoundCertificate& cert);

}  // namespace acvkit
