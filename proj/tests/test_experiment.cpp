#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace acvkit;
using namespace acvkit::testing;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("acvkit_test_" + name)).string();
}

std::string parse_error(const std::string& json) {
  try {
    parse_config(json);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::vector<std::vector<std::string>> csv_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

int column(const std::vector<std::string>& header, const std::string& name) {
  for (size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return static_cast<int>(k);
  return -1;
}

const char* kSmallLogistic = R"({
  "name": "small",
  "seed": 5,
  "instance": {"type": "synthetic", "n": 40, "features": 3, "nonzero": 3},
  "model": {"loss": "logistic", "regularizer": {"kind": "ridge", "scale": 1.0}},
  "lambda_grid": {"min": 1e-3, "max": 10, "count": 6},
  "methods": ["cv", "acv", "acv_ij", "acv_p3_reg"],
  "certify": {"theorems": ["thm1", "thm2", "thm3"]}
})";

}  // namespace

TEST(Config, ParsesDefaultsAndGrid) {
  const ExperimentConfig cfg = parse_config(kSmallLogistic);
  EXPECT_EQ(cfg.name, "small");
  EXPECT_EQ(cfg.synthetic.n, 40);
  EXPECT_EQ(cfg.synthetic.seed, 5u);
  ASSERT_EQ(cfg.grid.size(), 6u);
  EXPECT_DOUBLE_EQ(cfg.grid.front(), 1e-3);
  EXPECT_DOUBLE_EQ(cfg.grid.back(), 10.0);
  EXPECT_EQ(cfg.fold_kind, FoldKind::LeaveOneOut);
  EXPECT_EQ(cfg.reg.kind, RegKind::Ridge);
}

TEST(Config, DefaultGridIsThirtyPoints) {
  const ExperimentConfig cfg = parse_config(R"({"instance": {"type": "synthetic", "n": 10}})");
  const LoadedInstance inst = load_instance(cfg);
  ASSERT_EQ(inst.grid.size(), 30u);
  EXPECT_DOUBLE_EQ(inst.grid.front(), 1e-4);
  EXPECT_DOUBLE_EQ(inst.grid.back(), 1e2);
}

TEST(Config, ExplicitGridAcceptsInfinity) {
  const ExperimentConfig cfg =
      parse_config(R"({"lambda_grid": {"values": [0, 0.5, "inf"]}, "instance": {"type": "synthetic"}})");
  ASSERT_EQ(cfg.grid.size(), 3u);
  EXPECT_TRUE(is_infinite(cfg.grid[2]));
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(parse_error(R"({"bogus": 1})").find("bogus"), std::string::npos);
  EXPECT_NE(parse_error(R"({"model": {"loss": "hinge"}})").find("model.loss"), std::string::npos);
  EXPECT_NE(parse_error(R"({"instance": {"type": "synthetic", "n": "ten"}})").find("instance.n"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"lambda_grid": {"values": [1, 0.5]}})").find("lambda_grid"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"methods": ["acv", "magic"]})").find("methods"), std::string::npos);
  EXPECT_NE(parse_error(R"({"certify": {"theorems": ["thm9"]}})").find("certify.theorems"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"solver": {"tol_fit": -1}})").find("solver"), std::string::npos);
  EXPECT_NE(parse_error("{not json").find("JSON"), std::string::npos);
}

TEST(Config, SeedOverrideReplacesEverySeed) {
  ExperimentConfig cfg = parse_config(kSmallLogistic);
  override_seed(cfg, 77);
  EXPECT_EQ(cfg.seed, 77u);
  EXPECT_EQ(cfg.synthetic.seed, 77u);
  EXPECT_EQ(cfg.case_params.seed, 77u);
}

TEST(Dataset, CsvRoundTripWithHeader) {
  const Dataset d = logistic_data(12, 3, 2, 1);
  const std::string path = temp_path("roundtrip.csv");
  {
    std::ofstream out(path);
    out << to_csv(d);
  }
  const Dataset r = read_csv(path, true);
  EXPECT_EQ(r.n(), 12);
  EXPECT_EQ(r.dim(), 3);
  EXPECT_TRUE(r.X == d.X);
  EXPECT_TRUE(r.y == d.y);
  std::remove(path.c_str());
}

TEST(Dataset, HeaderlessCsv) {
  const std::string path = temp_path("plain.csv");
  {
    std::ofstream out(path);
    out << "1,2\n3,4.5\n-1e-3,7\n";
  }
  const Dataset r = read_csv(path, false);
  EXPECT_EQ(r.n(), 3);
  EXPECT_EQ(r.X(2, 0), -1e-3);
  EXPECT_FALSE(r.labeled());
  std::remove(path.c_str());
}

TEST(Dataset, CsvErrors) {
  const std::string path = temp_path("ragged.csv");
  {
    std::ofstream out(path);
    out << "1,2\n3\n";
  }
  EXPECT_THROW(read_csv(path, false), Error);
  EXPECT_THROW(read_csv(temp_path("missing.csv"), false), Error);
  std::remove(path.c_str());
}

TEST(Dataset, ValidationRejectsDegenerateInput) {
  EXPECT_THROW(Dataset::from_points(Mat::Zero(1, 2)), Error);
  EXPECT_THROW(Dataset::from_labeled(Mat::Zero(3, 2), Vec::Zero(2)), Error);
}

TEST(Synthetic, DeterministicAndPrefixStable) {
  const Dataset a = logistic_data(30, 4, 2, 9);
  const Dataset b = logistic_data(30, 4, 2, 9);
  EXPECT_TRUE(a.X == b.X && a.y == b.y);
  SyntheticSpec s;
  s.n = 10;
  s.features = 4;
  s.nonzero = 2;
  s.intercept = true;
  s.seed = 9;
  const Dataset c = make_logistic_dataset(s);
  EXPECT_EQ(c.dim(), 5);
  EXPECT_TRUE((c.X.col(4).array() == 1.0).all());
}

TEST(Sweep, DeterministicAndThreadIndependent) {
  const ExperimentConfig cfg = parse_config(kSmallLogistic);
  const SweepReport a = run_sweep(cfg, Exec::Serial);
  const SweepReport b = run_sweep(cfg, Exec::Parallel);
  const SweepReport c = run_sweep(cfg, Exec::Parallel);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(b.csv, c.csv);
  EXPECT_EQ(a.certificate_json, c.certificate_json);
  EXPECT_TRUE(a.certified);
  const auto rows = csv_rows(a.csv);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0][0], "lambda");
  EXPECT_GE(column(rows[0], "err_acv"), 0);
  EXPECT_GE(column(rows[0], "pass_thm1"), 0);
}

TEST(Sweep, QuadraticRidgeGapsVanish) {
  const std::string path = temp_path("quad.csv");
  {
    std::ofstream out(path);
    out << to_csv(gaussian_points(30, 2, 4, 0.3));
  }
  const ExperimentConfig cfg = parse_config(R"({
    "instance": {"type": "csv", "path": ")" + path + R"(", "labeled": false},
    "model": {"loss": "quadratic", "regularizer": {"kind": "ridge"}},
    "methods": ["cv", "acv"],
    "certify": {"theorems": ["thm1"]}
  })");
  const SweepReport rep = run_sweep(cfg, Exec::Parallel);
  EXPECT_TRUE(rep.all_pass);
  const auto rows = csv_rows(rep.csv);
  const int col = column(rows[0], "err_acv");
  ASSERT_GE(col, 0);
  for (size_t r = 1; r < rows.size(); ++r) EXPECT_LE(std::stod(rows[r][col]), 1e-10);
  std::remove(path.c_str());
}

TEST(Sweep, Prop7RowsMatchLibrary) {
  const ExperimentConfig cfg = parse_config(R"({
    "instance": {"type": "counterexample", "case": "prop7", "n": 16},
    "methods": ["cv", "proxacv"]
  })");
  const SweepReport rep = run_sweep(cfg, Exec::Serial);
  const auto rows = csv_rows(rep.csv);
  ASSERT_EQ(rows.size(), 3u);
  const int col = column(rows[0], "proxacv");
  const double diff = std::stod(rows[1][col]) - std::stod(rows[2][col]);
  EXPECT_EQ(std::stod(rows[1][0]), 0.0);
  EXPECT_DOUBLE_EQ(std::stod(rows[2][0]), std::sqrt(2.0 / 16));

  const CounterexampleInstance ce = build(Case::Prop7, CaseParams{.n = 16});
  const FoldScheme loo = make_folds(16, FoldKind::LeaveOneOut);
  const FitResult f0 = fit_erm(ce.model, ce.data, full_weights(16), 0.0, SolverConfig{});
  const FitResult fz = fit_erm(ce.model, ce.data, full_weights(16), ce.zbar, SolverConfig{});
  const double lib = proxacv(ce.model, ce.data, f0, loo, SolverConfig{}).value -
                     proxacv(ce.model, ce.data, fz, loo, SolverConfig{}).value;
  EXPECT_NEAR(diff, lib, 1e-15);
}

TEST(Scaling, SlopeOfExactPowerLaw) {
  EXPECT_NEAR(loglog_slope({1, 2, 4, 8}, {1, 0.25, 0.0625, 0.015625}), -2.0, 1e-14);
  EXPECT_TRUE(std::isinf(loglog_slope({1, 2}, {1, 0})));
}

TEST(Scaling, QuadraticRidgeGivesSentinel) {
  const std::string path = temp_path("quad_scaling.csv");
  {
    std::ofstream out(path);
    out << to_csv(gaussian_points(80, 1, 6, 0.3));
  }
  const ExperimentConfig cfg = parse_config(R"({
    "instance": {"type": "csv", "path": ")" + path + R"(", "labeled": false},
    "model": {"loss": "quadratic", "regularizer": {"kind": "ridge"}},
    "lambda_grid": {"min": 0.1, "max": 10, "count": 4},
    "scaling": {"n": [20, 40, 80], "pairs": ["acv_p3-cv"]}
  })");
  const ScalingReport rep = scaling_study(cfg, Exec::Serial);
  ASSERT_EQ(rep.slope.size(), 1u);
  for (double g : rep.max_gap[0]) EXPECT_LE(g, 1e-12);
  EXPECT_TRUE(std::isinf(rep.slope[0]) && rep.slope[0] < 0) << rep.slopes_csv;
  EXPECT_FALSE(rep.note[0].empty());
  std::remove(path.c_str());
}

TEST(Fit, CsvHasCoefficientColumns) {
  const std::string csv = run_fit(parse_config(kSmallLogistic), Exec::Serial);
  const auto rows = csv_rows(csv);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0].back(), "beta_2");
  EXPECT_EQ(rows[1][1], "1");
}

TEST(CV, CommandMatchesLibrary) {
  const ExperimentConfig cfg = parse_config(kSmallLogistic);
  const auto rows = csv_rows(run_cv(cfg, Exec::Serial));
  const LoadedInstance inst = load_instance(cfg);
  const FoldScheme loo = make_folds(inst.data.n(), FoldKind::LeaveOneOut);
  const FitResult f = fit_erm(inst.model, inst.data, full_weights(inst.data.n()), inst.grid[2], cfg.solver);
  const CVResult cv = exact_cv(inst.model, inst.data, inst.grid[2], loo, cfg.solver, &f);
  EXPECT_NEAR(std::stod(rows[3][1]), cv.value, 1e-12);
}

TEST(CounterexampleCommand, ReportsAllQuantities) {
  const CounterexampleReport rep = counterexample_cmd(Case::Prop7, CaseParams{.n = 16}, SolverConfig{},
                                                      Exec::Serial);
  EXPECT_EQ(rep.csv.rfind("quantity,pipeline,reference,abs_diff\n", 0), 0u);
  EXPECT_NE(rep.csv.find("beta0_minus_beta_zbar"), std::string::npos);
  EXPECT_FALSE(rep.dataset_csv.empty());
}
