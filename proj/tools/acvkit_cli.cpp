// Command-line front end: fit, cv, sweep, scaling, certify, counterexample.

#include "acvkit/experiment.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace acvkit;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void add_common(CLI::App* app, Common& c, bool need_config) {
  auto* opt = app->add_option("--config", c.config, "JSON experiment config");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "override every seed in the config");
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

Exec setup_exec(const Common& c) {
  omp_set_num_threads(c.jobs);
  return c.jobs > 1 ? Exec::Parallel : Exec::Serial;
}

ExperimentConfig config_for(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) override_seed(cfg, *c.seed);
  return cfg;
}

void write_file(const Common& c, const std::string& name, const std::string& content) {
  fs::create_directories(c.out);
  const fs::path p = fs::path(c.out) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << content;
  std::cout << "wrote " << p.string() << "\n";
}

int report_certificate(const SweepReport& rep, const Common& c) {
  write_file(c, "certificate.json", rep.certificate_json);
  write_file(c, "certificate.csv", rep.certificate_csv);
  const auto& cert = rep.certificate;
  long rows_failed = 0;
  for (const auto& r : cert.rows) rows_failed += r.pass ? 0 : 1;
  std::cout << "certificate: " << cert.rows.size() << " rows, " << rows_failed << " failed\n";
  for (const auto& s : cert.selections) {
    std::cout << "  " << s.theorem << ": "
              << (s.evaluated ? (s.pass ? "pass" : "FAIL") : "not evaluated (" + s.note + ")")
              << "\n";
  }
  for (const auto& l : cert.lemmas) {
    std::cout << "  lemma " << l.name << ": " << l.checks << " checks, " << l.violations
              << " violations\n";
  }
  if (!cert.constants.note.empty()) std::cout << "  note: " << cert.constants.note << "\n";
  std::cout << (cert.all_pass ? "ALL PASS" : "CERTIFICATE FAILED") << "\n";
  return cert.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and approximate cross-validation with error certificates"};
  app.require_subcommand(1);

  Common fit_c, cv_c, sweep_c, scaling_c, cert_c, ce_c;
  auto* fit = app.add_subcommand("fit", "fit the regularization path");
  add_common(fit, fit_c, true);
  auto* cv = app.add_subcommand("cv", "exact cross-validation curve");
  add_common(cv, cv_c, true);
  auto* sweep = app.add_subcommand("sweep", "CV and approximations over the lambda grid");
  add_common(sweep, sweep_c, true);
  auto* scaling = app.add_subcommand("scaling", "max-gap scaling in n with log-log slopes");
  add_common(scaling, scaling_c, true);
  auto* certify_cmd = app.add_subcommand("certify", "evaluate theorem bounds against observed gaps");
  add_common(certify_cmd, cert_c, true);

  auto* ce = app.add_subcommand("counterexample", "replay a closed-form counterexample");
  add_common(ce, ce_c, false);
  std::string case_name_arg;
  CaseParams params;
  ce->add_option("case", case_name_arg, "prop5, prop6, prop7, fig1a or fig1b")->required();
  ce->add_option("--n", params.n, "number of points")->capture_default_str();
  ce->add_option("--delta", params.delta, "patch width for prop6")->capture_default_str();
  ce->add_flag("--literal", params.literal, "fig1a: caption moments describe z itself");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      const Exec exec = setup_exec(fit_c);
      write_file(fit_c, "fit.csv", run_fit(config_for(fit_c), exec));
      return 0;
    }
    if (cv->parsed()) {
      const Exec exec = setup_exec(cv_c);
      write_file(cv_c, "cv.csv", run_cv(config_for(cv_c), exec));
      return 0;
    }
    if (sweep->parsed()) {
      const Exec exec = setup_exec(sweep_c);
      const SweepReport rep = run_sweep(config_for(sweep_c), exec);
      write_file(sweep_c, "sweep.csv", rep.csv);
      return rep.certified ? report_certificate(rep, sweep_c) : 0;
    }
    if (certify_cmd->parsed()) {
      const Exec exec = setup_exec(cert_c);
      const ExperimentConfig cfg = config_for(cert_c);
      if (cfg.theorems.empty()) throw Error("certify needs certify.theorems in the config");
      const SweepReport rep = run_sweep(cfg, exec);
      write_file(cert_c, "sweep.csv", rep.csv);
      return report_certificate(rep, cert_c);
    }
    if (scaling->parsed()) {
      const Exec exec = setup_exec(scaling_c);
      const ScalingReport rep = scaling_study(config_for(scaling_c), exec);
      write_file(scaling_c, "scaling.csv", rep.csv);
      write_file(scaling_c, "scaling_slopes.csv", rep.slopes_csv);
      std::cout << rep.slopes_csv;
      return 0;
    }
    if (ce->parsed()) {
      const Exec exec = setup_exec(ce_c);
      const Case c = parse_case(case_name_arg);
      SolverConfig solver;
      if (!ce_c.config.empty()) solver = config_for(ce_c).solver;
      if (ce_c.seed) params.seed = *ce_c.seed;
      const CounterexampleReport rep = counterexample_cmd(c, params, solver, exec);
      std::cout << rep.text;
      write_file(ce_c, "counterexample_" + case_name(c) + ".csv", rep.csv);
      write_file(ce_c, case_name(c) + "_dataset.csv", rep.dataset_csv);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
