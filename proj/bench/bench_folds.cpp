#include "acvkit/experiment.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace acvkit;

namespace {

struct Problem {
  Dataset data;
  Model model;
  FitResult fit;
  FoldScheme scheme;
};

const Problem& problem(bool l1) {
  static const auto make = [](bool use_l1) {
    SyntheticSpec s;
    s.n = 200;
    s.features = 10;
    s.nonzero = 5;
    s.seed = 3;
    Problem p{make_logistic_dataset(s),
              Model{std::make_shared<GlmLoss>(GlmLink::Logistic), use_l1 ? Regularizer::l1() : Regularizer::ridge()},
              {},
              make_folds(s.n, FoldKind::LeaveOneOut)};
    p.fit = fit_erm(p.model, p.data, full_weights(s.n), 0.01, SolverConfig{});
    return p;
  };
  static const Problem ridge = make(false), lasso = make(true);
  return l1 ? lasso : ridge;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_ExactCV(benchmark::State& state) {
  const Problem& p = problem(false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_cv(p.model, p.data, 0.01, p.scheme, SolverConfig{}, &p.fit, exec_of(state)).value);
  }
}

void BM_ACV(benchmark::State& state) {
  const Problem& p = problem(false);
  for (auto _ : state) benchmark::DoNotOptimize(acv(p.model, p.data, p.fit, p.scheme, exec_of(state)).value);
}

void BM_ProxACV(benchmark::State& state) {
  const Problem& p = problem(true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(proxacv(p.model, p.data, p.fit, p.scheme, SolverConfig{}, {}, exec_of(state)).value);
  }
}

}  // namespace

// Argument 0 runs the serial reference loop, 1 the OpenMP loop.
BENCHMARK(BM_ExactCV)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ACV)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProxACV)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
