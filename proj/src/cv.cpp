#include "acvkit/cv.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace acvkit {

std::string fold_kind_name(FoldKind kind) {
  switch (kind) {
    case FoldKind::LeaveOneOut: return "loo";
    case FoldKind::KFold: return "kfold";
    case FoldKind::LeavePairOut: return "lpo";
  }
  return "unknown";
}

FoldScheme make_folds(int n, FoldKind kind, int k, std::uint64_t seed) {
  if (n < 2) throw Error("folds need n >= 2");
  FoldScheme s;
  s.kind = kind;
  switch (kind) {
    case FoldKind::LeaveOneOut:
      s.k = n;
      for (int i = 0; i < n; ++i) s.held_out.push_back({i});
      break;
    case FoldKind::KFold: {
      if (k < 2 || k > n) {
        throw Error("k-fold needs 2 <= k <= n, got k = " + std::to_string(k) + ", n = " +
                    std::to_string(n));
      }
      s.k = k;
      std::vector<int> order(static_cast<size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      if (seed != 0) {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
      }
      const int block = n / k;
      for (int f = 0; f < k; ++f) {
        const int begin = f * block;
        const int end = f == k - 1 ? n : begin + block;
        std::vector<int> fold(order.begin() + begin, order.begin() + end);
        std::sort(fold.begin(), fold.end());
        s.held_out.push_back(std::move(fold));
      }
      break;
    }
    case FoldKind::LeavePairOut:
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) s.held_out.push_back({i, j});
      }
      s.k = static_cast<int>(s.held_out.size());
      break;
  }
  return s;
}

double heldout_loss(const Model& model, const Dataset& data, const std::vector<int>& held_out,
                    const Vec& beta) {
  double s = 0.0;
  for (int j : held_out) s += model.loss->value(data, j, beta);
  return s / static_cast<double>(held_out.size());
}

double fold_average(const std::vector<double>& losses) {
  double s = 0.0;
  for (double v : losses) s += v;
  return s / static_cast<double>(losses.size());
}

CVResult exact_cv(const Model& model, const Dataset& data, double lambda, const FoldScheme& scheme,
                  const SolverConfig& cfg, const FitResult* full_fit, Exec exec) {
  const int folds = scheme.size();
  CVResult res;
  res.lambda = lambda;
  res.method = "cv";
  res.estimators.resize(static_cast<size_t>(folds));
  res.heldout_loss.resize(static_cast<size_t>(folds));
  res.fold_fits.resize(static_cast<size_t>(folds));
  for_each_index(folds, exec, [&](int f) {
    const auto& S = scheme.held_out[static_cast<size_t>(f)];
    const Vec w = holdout_weights(data.n(), S);
    FitResult fit = fit_erm(model, data, w, lambda, cfg, full_fit ? &full_fit->beta : nullptr);
    if (!fit.converged) {
      throw Error("fold " + std::to_string(f) + " fit did not converge at lambda = " +
                  std::to_string(lambda) + " (residual " + std::to_string(fit.residual) + ")");
    }
    res.heldout_loss[static_cast<size_t>(f)] = heldout_loss(model, data, S, fit.beta);
    res.estimators[static_cast<size_t>(f)] = fit.beta;
    res.fold_fits[static_cast<size_t>(f)] = std::move(fit);
  });
  res.value = fold_average(res.heldout_loss);
  return res;
}

}  // namespace acvkit
