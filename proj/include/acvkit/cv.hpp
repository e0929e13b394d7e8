#pragma once

#include "acvkit/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace acvkit {

enum class FoldKind { LeaveOneOut, KFold, LeavePairOut };

struct FoldScheme {
  FoldKind kind = FoldKind::LeaveOneOut;
  int k = 0;
  std::vector<std::vector<int>> held_out;

  int size() const { return static_cast<int>(held_out.size()); }
};

// LOO gives n singleton folds. k-fold assigns consecutive blocks of n/k points
// with the last fold absorbing the remainder; a nonzero seed shuffles the
// point order first. Leave-pair-out enumerates all pairs in lexicographic order.
FoldScheme make_folds(int n, FoldKind kind, int k = 0, std::uint64_t seed = 0);

std::string fold_kind_name(FoldKind kind);

// Per-fold records shared by exact CV and every approximation.
struct FoldEstimates {
  double lambda = 0.0;
  std::string method;
  std::vector<Vec> estimators;
  std::vector<double> heldout_loss;
  double value = 0.0;
};

struct CVResult : FoldEstimates {
  std::vector<FitResult> fold_fits;
};

// Mean held-out loss of a fold estimator: (1/|S|) sum_{j in S} l(z_j, beta).
double heldout_loss(const Model& model, const Dataset& data, const std::vector<int>& held_out,
                    const Vec& beta);

// Sums per-fold losses in fold order and divides by the fold count.
double fold_average(const std::vector<double>& losses);

// CV(lambda) = mean over folds of the held-out loss at the leave-out minimizer.
// Fold fits warm-start from full_fit when given.
CVResult exact_cv(const Model& model, const Dataset& data, double lambda, const FoldScheme& scheme,
                  const SolverConfig& cfg, const FitResult* full_fit = nullptr,
                  Exec exec = Exec::Serial);

}  // namespace acvkit
