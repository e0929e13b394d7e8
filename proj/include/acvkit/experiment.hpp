#pragma once

#include "acvkit/bounds.hpp"
#include "acvkit/counterexamples.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace acvkit {

// Synthetic logistic design: standard-normal covariates times `scale`, an
// optional constant column appended last, ground-truth coefficients that are
// N(0, 1) on the first `nonzero` coordinates and zero elsewhere, labels drawn
// from the logistic model.
struct SyntheticSpec {
  int n = 200;
  int features = 5;
  int nonzero = 5;
  bool intercept = false;
  double scale = 1.0;
  std::uint64_t seed = 1;
};

Dataset make_logistic_dataset(const SyntheticSpec& spec);

enum class InstanceKind { Counterexample, Synthetic, Csv };

struct ExperimentConfig {
  InstanceKind instance = InstanceKind::Synthetic;
  Case counterexample = Case::Prop5;
  CaseParams case_params;
  SyntheticSpec synthetic;
  std::string csv_path;
  bool csv_labeled = true;

  std::string loss = "logistic";
  Vec metric;
  Regularizer reg = Regularizer::ridge(1.0);

  std::vector<double> grid;
  std::vector<std::string> methods;
  FoldKind fold_kind = FoldKind::LeaveOneOut;
  int fold_k = 0;
  std::uint64_t fold_seed = 0;
  SolverConfig solver;
  ProxOptions prox;
  double support_tol = 1e-12;

  std::vector<std::string> theorems;
  bool lemmas = true;

  std::vector<int> scaling_n;
  // Gap definitions "method-reference", e.g. "acv-cv" or "acv_ij-acv".
  std::vector<std::string> scaling_pairs;

  std::uint64_t seed = 1;
  std::string name;
};

// Parses a JSON config document. Errors name the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Replaces every seed in the config (instance, folds) with `seed`.
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);

struct LoadedInstance {
  std::string name;
  Dataset data;
  Model model;
  std::vector<double> grid;
};

// Builds the dataset and model; `n_override` replaces the configured n (CSV
// instances keep their first n rows).
LoadedInstance load_instance(const ExperimentConfig& cfg, std::optional<int> n_override = {});

// Fits over the grid. Columns: lambda, converged, iterations, residual,
// objective, beta_0 ... beta_{d-1}.
std::string run_fit(const ExperimentConfig& cfg, Exec exec);

// Exact CV over the grid. Columns: lambda, cv.
std::string run_cv(const ExperimentConfig& cfg, Exec exec);

struct SweepReport {
  std::string csv;
  bool certified = false;
  BoundCertificate certificate;
  std::string certificate_json;
  std::string certificate_csv;
  bool all_pass = true;
};

// Curves for every configured method plus the certificate for the configured
// theorems. CSV columns: lambda, one column per method, err_<method> =
// |method - cv| when cv is present, then gap_<thm>, bound_<thm>, pass_<thm>.
SweepReport run_sweep(const ExperimentConfig& cfg, Exec exec);

struct ScalingReport {
  std::vector<int> n;
  std::vector<std::string> pairs;
  // max_gap[p][k]: max over the grid of the gap for pair p at n[k].
  std::vector<std::vector<double>> max_gap;
  std::vector<double> slope;  // -inf when any gap is zero or all gaps are rounding noise
  std::vector<std::string> note;
  std::string csv;         // n, pair, max_gap
  std::string slopes_csv;  // pair, slope, note
};

// Least-squares slope of log(max gap) against log n per pair.
ScalingReport scaling_study(const ExperimentConfig& cfg, Exec exec);

// Least-squares slope of log y on log x; -inf if some y <= 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct CounterexampleReport {
  std::string text;
  std::string csv;  // quantity, pipeline, reference, abs_diff
  std::string dataset_csv;
};

CounterexampleReport counterexample_cmd(Case c, const CaseParams& params, const SolverConfig& cfg,
                                        Exec exec);

}  // namespace acvkit
