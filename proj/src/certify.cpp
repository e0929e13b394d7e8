#include "acvkit/bounds.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace acvkit {

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m = {
      "cv",     "acv",       "acv_ij",  "acv_p2_reg", "acv_p3",     "acv_p3_reg",
      "acv_sr", "acv_ij_sr", "proxacv", "proxacv_ij", "proxacv_p2_reg", "proxacv_p3",
      "proxacv_p3_reg"};
  return m;
}

namespace {

bool parse_taylor(const std::string& name, const std::string& base, TaylorOptions& opts) {
  const std::string prefix = base + "_p";
  if (name.rfind(prefix, 0) != 0) return false;
  std::string rest = name.substr(prefix.size());
  opts.regularized = false;
  const std::string reg = "_reg";
  if (rest.size() > reg.size() && rest.compare(rest.size() - reg.size(), reg.size(), reg) == 0) {
    opts.regularized = true;
    rest = rest.substr(0, rest.size() - reg.size());
  }
  if (rest != "2" && rest != "3") return false;
  opts.p = rest[0] - '0';
  return true;
}

ApproxResult run_method(const std::string& name, const Model& model, const Dataset& data,
                        const FitResult& fit, const CurveOptions& o) {
  TaylorOptions taylor;
  if (name == "acv") return acv(model, data, fit, o.scheme, o.exec);
  if (name == "acv_ij") return acv_ij(model, data, fit, o.scheme, o.exec);
  if (name == "acv_sr") {
    return acv_support_restricted(model, data, fit, o.scheme, false, o.support_tol, o.exec);
  }
  if (name == "acv_ij_sr") {
    return acv_support_restricted(model, data, fit, o.scheme, true, o.support_tol, o.exec);
  }
  if (name == "proxacv") return proxacv(model, data, fit, o.scheme, o.solver, o.prox, o.exec);
  if (name == "proxacv_ij") return proxacv_ij(model, data, fit, o.scheme, o.solver, o.prox, o.exec);
  if (parse_taylor(name, "acv", taylor)) return acv_p(model, data, fit, o.scheme, taylor, o.exec);
  if (parse_taylor(name, "proxacv", taylor)) {
    return proxacv_p(model, data, fit, o.scheme, taylor, o.solver, o.exec);
  }
  throw Error("unknown method '" + name + "'");
}

std::string lambda_str(double lambda) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", lambda);
  return buf;
}

}  // namespace

Curves compute_curves(const Model& model, const Dataset& data, const std::vector<double>& grid,
                      const CurveOptions& opts) {
  if (grid.empty()) throw Error("lambda grid is empty");
  Curves c;
  c.grid = grid;
  c.fits = fit_path(model, data, full_weights(data.n()), grid, opts.solver, opts.exec);
  for (size_t k = 0; k < grid.size(); ++k) {
    if (!c.fits[k].converged) {
      throw Error("full-data fit did not converge at lambda = " + lambda_str(grid[k]));
    }
  }
  for (const auto& name : opts.methods) {
    if (name == "cv") {
      c.cv.reserve(grid.size());
      for (size_t k = 0; k < grid.size(); ++k) {
        c.cv.push_back(
            exact_cv(model, data, grid[k], opts.scheme, opts.solver, &c.fits[k], opts.exec));
      }
      continue;
    }
    auto& out = c.approx[name];
    out.reserve(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
      try {
        out.push_back(run_method(name, model, data, c.fits[k], opts));
      } catch (const Error& e) {
        throw Error(name + " at lambda = " + lambda_str(grid[k]) + ": " + e.what());
      }
    }
  }
  return c;
}

int grid_argmin(const std::vector<double>& grid, const std::vector<double>& values) {
  if (grid.empty() || grid.size() != values.size()) throw Error("grid_argmin: size mismatch");
  int best = 0;
  for (int k = 1; k < static_cast<int>(values.size()); ++k) {
    const double v = values[static_cast<size_t>(k)];
    const double b = values[static_cast<size_t>(best)];
    if (v < b || (v == b && grid[static_cast<size_t>(k)] < grid[static_cast<size_t>(best)])) best = k;
  }
  return best;
}

std::vector<std::string> methods_for_theorems(const std::vector<std::string>& theorems) {
  std::set<std::string> need;
  for (const auto& t : theorems) {
    if (t == "thm1" || t == "thm4" || t == "thm5") {
      need.insert({"cv", "acv"});
    } else if (t == "thm2") {
      need.insert({"acv", "acv_ij"});
    } else if (t == "thm3") {
      need.insert({"cv", "acv_p3_reg"});
    } else if (t == "thm6" || t == "thm8") {
      need.insert({"cv", "proxacv"});
    } else if (t == "thm7") {
      need.insert({"proxacv", "proxacv_ij"});
    } else {
      throw Error("unknown theorem '" + t + "' (expected thm1 ... thm8)");
    }
  }
  // Keep the canonical method order so outputs are stable.
  std::vector<std::string> out;
  for (const auto& m : known_methods()) {
    if (need.count(m)) out.push_back(m);
  }
  return out;
}

namespace {

std::vector<double> values_of(const std::vector<ApproxResult>& r) {
  std::vector<double> v;
  for (const auto& x : r) v.push_back(x.value);
  return v;
}

std::vector<double> values_of(const std::vector<CVResult>& r) {
  std::vector<double> v;
  for (const auto& x : r) v.push_back(x.value);
  return v;
}

const std::vector<ApproxResult>& need_method(const Curves& c, const std::string& m) {
  const auto it = c.approx.find(m);
  if (it == c.approx.end()) throw Error("certify: curves lack method '" + m + "'");
  return it->second;
}

void need_cv(const Curves& c) {
  if (c.cv.size() != c.grid.size()) throw Error("certify: curves lack exact CV");
}

std::vector<std::pair<int, int>> moments_for(const std::vector<std::string>& theorems) {
  std::set<std::pair<int, int>> s;
  for (const auto& t : theorems) {
    if (t == "thm1" || t == "thm6") s.insert({{0, 3}, {1, 3}, {1, 4}});
    if (t == "thm2" || t == "thm7") s.insert({{1, 2}, {2, 2}, {3, 2}});
    if (t == "thm3") s.insert({{0, 4}, {1, 4}, {1, 6}});
    if (t == "thm4" || t == "thm8") s.insert({{0, 2}, {1, 2}, {0, 3}, {1, 3}, {1, 4}});
    if (t == "thm5") s.insert({{1, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {1, 4}});
  }
  return {s.begin(), s.end()};
}

bool row_pass(double gap, double bound, double slack) {
  return std::isfinite(gap) && !std::isnan(bound) && gap <= bound + slack;
}

struct LemmaTally {
  LemmaRecord rec;
  void add(double residual, double slack) {
    ++rec.checks;
    rec.worst = std::max(rec.worst, residual);
    if (!(residual <= slack)) ++rec.violations;
  }
};

Mat heldout_hessian(const Model& model, const Dataset& data, const std::vector<int>& S,
                    const Vec& beta) {
  Mat H = Mat::Zero(beta.size(), beta.size());
  for (int j : S) H += model.loss->hessian(data, j, beta);
  return H / static_cast<double>(data.n());
}

double op_norm(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<LemmaRecord> estimator_lemmas(const Model& model, const Dataset& data,
                                          const Curves& c, const CurveOptions& co,
                                          const ConstantSet& cs, double slack) {
  std::map<std::string, LemmaTally> t;
  const double kappa2 = kappa(2, cs, cs.grid);
  const auto* acv_r = c.has("acv") ? &c.approx.at("acv") : nullptr;
  const auto* acvij_r = c.has("acv_ij") ? &c.approx.at("acv_ij") : nullptr;
  const auto* prox_r = c.has("proxacv") ? &c.approx.at("proxacv") : nullptr;
  const auto* proxij_r = c.has("proxacv_ij") ? &c.approx.at("proxacv_ij") : nullptr;
  const bool have_cv = c.cv.size() == c.grid.size();
  const double cm = cs.c_m;
  const double cl = cs.c_ell;

  for (size_t k = 0; k < c.grid.size(); ++k) {
    const double lambda = c.grid[k];
    if (is_infinite(lambda)) continue;
    const Vec& bhat = c.fits[k].beta;
    Mat full_H;
    Vec full_g;
    if (prox_r) {
      full_H = model.loss->hessian(data, full_weights(data.n()), bhat);
      full_g = model.loss->gradient(data, full_weights(data.n()), bhat);
    }
    for (int f = 0; f < co.scheme.size(); ++f) {
      const auto& S = co.scheme.held_out[static_cast<size_t>(f)];
      const size_t fi = static_cast<size_t>(f);
      const double gnorm = heldout_gradient(model, data, S, bhat).norm();
      if (have_cv) {
        const Vec& cvest = c.cv[k].estimators[fi];
        t["cv_proximity"].add((bhat - cvest).norm() - gnorm / cm, slack);
        if (acv_r) {
          t["acv_cv_estimator"].add(
              ((*acv_r)[k].estimators[fi] - cvest).norm() - kappa2 * gnorm * gnorm / (cm * cm),
              slack);
        }
      }
      if (acv_r && acvij_r) {
        const double hs = op_norm(heldout_hessian(model, data, S, bhat));
        t["acv_ij_estimator"].add(
            ((*acvij_r)[k].estimators[fi] - (*acv_r)[k].estimators[fi]).norm() -
                hs * gnorm / (cm * cm),
            slack);
      }
      if (prox_r) {
        const Vec& est = (*prox_r)[k].estimators[fi];
        t["proxacv_proximity"].add((est - bhat).norm() - gnorm / cm, slack);
        if (proxij_r) {
          const double hs = op_norm(heldout_hessian(model, data, S, bhat));
          t["proxacv_ij_estimator"].add(
              ((*proxij_r)[k].estimators[fi] - est).norm() - hs * gnorm / (cl * cl), slack);
        }
        // beta_hat = prox^{H_i}(beta_hat - H_i^{-1} grad l(P_n, beta_hat)).
        Mat Hi = full_H - heldout_hessian(model, data, S, bhat);
        const Vec fixed =
            solve_penalized_quadratic(Hi, Hi * bhat - full_g, model.reg, lambda, co.solver, &bhat);
        t["prox_fixed_point"].add((fixed - bhat).norm() - 1e-8, slack);
      }
    }
  }
  std::vector<LemmaRecord> out;
  for (auto& [name, tally] : t) {
    tally.rec.name = name;
    out.push_back(tally.rec);
  }
  return out;
}

}  // namespace

BoundCertificate certify(const Model& model, const Dataset& data, const Curves& curves,
                         const CurveOptions& co, const CertifyOptions& opts) {
  BoundCertificate cert;
  cert.instance = opts.instance;
  cert.n = data.n();
  cert.slack = opts.slack;
  cert.lemma_slack = opts.lemma_slack;
  const int n = data.n();
  const bool have_cv = curves.cv.size() == curves.grid.size();

  cert.constants = analytic_constants(model, data, curves.grid, curves.fits, co.scheme, co.solver,
                                      have_cv ? &curves.cv : nullptr, opts.constants, co.exec);
  const ConstantSet& cs = cert.constants;
  if (!cs.evaluable) {
    cert.all_pass = false;
    return cert;
  }
  cert.moments = grid_moments(model, data, curves.fits, cs, moments_for(opts.theorems));
  for (int p = 1; p <= 3; ++p) cert.kappas["kappa" + std::to_string(p)] = kappa(p, cs, cs.grid);
  for (double l : curves.grid) cert.kappa2_per_lambda.push_back(kappa_ratio(2, cs, l));

  auto add_rows = [&](const std::string& thm, const std::string& method,
                      const std::vector<double>& approx, const std::vector<double>& ref,
                      Assessment kind, int p) {
    for (size_t k = 0; k < curves.grid.size(); ++k) {
      CertificateRow row;
      row.lambda = curves.grid[k];
      row.method = method;
      row.theorem = thm;
      row.gap = std::abs(approx[k] - ref[k]);
      row.bound = assessment_bound(kind, cs, cert.moments, n, row.lambda, p);
      row.pass = row_pass(row.gap, row.bound, opts.slack);
      cert.all_pass = cert.all_pass && row.pass;
      cert.rows.push_back(row);
    }
  };

  auto select = [&](const std::string& thm, const std::string& method, Selection kind) {
    need_cv(curves);
    SelectionRecord rec;
    rec.theorem = thm;
    const auto av = values_of(need_method(curves, method));
    const int ka = grid_argmin(curves.grid, av);
    const int kc = grid_argmin(curves.grid, values_of(curves.cv));
    rec.lambda_approx = curves.grid[static_cast<size_t>(ka)];
    rec.lambda_cv = curves.grid[static_cast<size_t>(kc)];
    const double dist =
        (curves.fits[static_cast<size_t>(ka)].beta - curves.fits[static_cast<size_t>(kc)].beta)
            .norm();
    try {
      rec.q = selection_bound(kind, cs, cert.moments, n);
    } catch (const Error& e) {
      rec.note = e.what();
      cert.selections.push_back(rec);
      return;
    }
    rec.evaluated = true;
    rec.observed = kind == Selection::Thm5 ? std::pow(dist - rec.q.center, 2) : dist * dist;
    rec.pass = row_pass(rec.observed, rec.q.rhs, opts.slack);
    cert.all_pass = cert.all_pass && rec.pass;
    cert.selections.push_back(rec);
  };

  for (const auto& thm : opts.theorems) {
    if (thm == "thm1") {
      need_cv(curves);
      add_rows(thm, "acv", values_of(need_method(curves, "acv")), values_of(curves.cv),
               Assessment::Thm1, 2);
    } else if (thm == "thm2") {
      add_rows(thm, "acv_ij", values_of(need_method(curves, "acv_ij")),
               values_of(need_method(curves, "acv")), Assessment::Thm2, 2);
    } else if (thm == "thm3") {
      need_cv(curves);
      add_rows(thm, "acv_p3_reg", values_of(need_method(curves, "acv_p3_reg")),
               values_of(curves.cv), Assessment::Thm3, 3);
    } else if (thm == "thm6") {
      need_cv(curves);
      add_rows(thm, "proxacv", values_of(need_method(curves, "proxacv")), values_of(curves.cv),
               Assessment::Thm6, 2);
    } else if (thm == "thm7") {
      add_rows(thm, "proxacv_ij", values_of(need_method(curves, "proxacv_ij")),
               values_of(need_method(curves, "proxacv")), Assessment::Thm7, 2);
    } else if (thm == "thm4") {
      select(thm, "acv", Selection::Thm4);
    } else if (thm == "thm5") {
      select(thm, "acv", Selection::Thm5);
    } else if (thm == "thm8") {
      select(thm, "proxacv", Selection::Thm8);
    } else {
      throw Error("unknown theorem '" + thm + "'");
    }
  }

  if (opts.lemmas) {
    cert.lemmas = estimator_lemmas(model, data, curves, co, cs, opts.lemma_slack);
    for (const auto& l : cert.lemmas) cert.all_pass = cert.all_pass && l.violations == 0;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using ojson = nlohmann::ordered_json;

ojson num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string certificate_json(const BoundCertificate& cert) {
  ojson j;
  j["certificate_version"] = 1;
  j["instance"] = cert.instance;
  j["n"] = cert.n;
  j["slack"] = num(cert.slack);
  j["lemma_slack"] = num(cert.lemma_slack);
  const ConstantSet& cs = cert.constants;
  ojson c;
  c["c_ell"] = num(cs.c_ell);
  c["c_ell_source"] = cs.c_ell_source;
  c["c_pi"] = num(cs.c_pi);
  c["lambda_pi"] = num(cs.lambda_pi);
  c["c_m"] = num(cs.c_m);
  c["c_m_source"] = cs.c_m_source;
  c["safety"] = num(cs.safety);
  c["C_ell_2"] = num(cs.C_ell_2);
  c["C_pi_2"] = num(cs.C_pi_2);
  c["C_ell_3"] = num(cs.C_ell_3);
  c["C_pi_3"] = num(cs.C_pi_3);
  c["C_ell_4"] = num(cs.C_ell_4);
  c["C_pi_4"] = num(cs.C_pi_4);
  c["grad_reg_at_est0"] = num(cs.grad_reg_at_est0);
  c["q"] = cs.q;
  c["L_max"] = num(cs.L.size() ? cs.L.maxCoeff() : 0.0);
  c["evaluable"] = cs.evaluable;
  c["note"] = cs.note;
  j["constants"] = c;
  ojson grid = ojson::array();
  for (double l : cs.grid) grid.push_back(num(l));
  j["lambda_grid"] = grid;
  ojson m = ojson::array();
  for (const auto& [sr, v] : cert.moments.values()) {
    m.push_back({{"s", sr.first}, {"r", sr.second}, {"value", num(v)}, {"source", "grid-sup"}});
  }
  j["moments"] = m;
  ojson k;
  for (const auto& [name, v] : cert.kappas) k[name] = num(v);
  j["kappa"] = k;
  ojson kpl = ojson::array();
  for (double v : cert.kappa2_per_lambda) kpl.push_back(num(v));
  j["kappa2_per_lambda"] = kpl;
  ojson rows = ojson::array();
  for (const auto& r : cert.rows) {
    rows.push_back({{"lambda", num(r.lambda)},
                    {"method", r.method},
                    {"theorem", r.theorem},
                    {"gap", num(r.gap)},
                    {"bound", num(r.bound)},
                    {"pass", r.pass}});
  }
  j["rows"] = rows;
  ojson sel = ojson::array();
  for (const auto& s : cert.selections) {
    sel.push_back({{"theorem", s.theorem},
                   {"lambda_approx", num(s.lambda_approx)},
                   {"lambda_cv", num(s.lambda_cv)},
                   {"evaluated", s.evaluated},
                   {"observed", num(s.observed)},
                   {"rhs", num(s.q.rhs)},
                   {"A", num(s.q.A)},
                   {"A_prime", num(s.q.A1)},
                   {"A_double_prime", num(s.q.A2)},
                   {"A_tilde", num(s.q.A_tilde)},
                   {"center", num(s.q.center)},
                   {"pass", s.pass},
                   {"note", s.note}});
  }
  j["selection"] = sel;
  ojson lem = ojson::array();
  for (const auto& l : cert.lemmas) {
    lem.push_back({{"name", l.name},
                   {"checks", l.checks},
                   {"violations", l.violations},
                   {"worst_residual", num(l.worst)}});
  }
  j["lemmas"] = lem;
  j["all_pass"] = cert.all_pass;
  return j.dump(2) + "\n";
}

std::string certificate_csv(const BoundCertificate& cert) {
  std::ostringstream os;
  os << "lambda,method,gap,bound,pass\n";
  for (const auto& r : cert.rows) {
    os << fmt(r.lambda) << ',' << r.method << ',' << fmt(r.gap) << ',' << fmt(r.bound) << ','
       << (r.pass ? 1 : 0) << '\n';
  }
  return os.str();
}

bool verdicts_consistent(const BoundCertificate& cert) {
  for (const auto& r : cert.rows) {
    if (r.pass != row_pass(r.gap, r.bound, cert.slack)) return false;
  }
  return true;
}

}  // namespace acvkit
