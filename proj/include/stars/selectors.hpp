#pragma once

// Baseline regularization selectors on a glasso path: AIC, BIC, K-fold
// cross-validation, and the truth-using oracle.

#include <cstdint>
#include <vector>

#include "stars/glasso.hpp"
#include "stars/selection.hpp"

namespace stars {

inline constexpr int kDefaultFolds = 10;

struct PathScores {
  RegularizationGrid grid;
  std::vector<double> scores;
  Method method = Method::Aic;
};

// m(m - 1) / 2 + p with m the number of edges (nonzero off-diagonal pairs).
long long degrees_of_freedom(const PrecisionEstimate& est, int p);

// -2 log-likelihood of the n-sample Gaussian model (constants dropped):
// n * (trace(S Omega) - log|Omega|).
double minus_two_log_likelihood(const PrecisionEstimate& est, const SymMatrix& sigma_hat,
                                double n);

// AIC: -2l + 2 d; BIC: -2l + d log n. One score per path element.
PathScores information_criterion(const std::vector<PrecisionEstimate>& path,
                                 const SymMatrix& sigma_hat_full, const RegularizationGrid& grid,
                                 double n, Method method);

SelectionResult aic_select(const std::vector<PrecisionEstimate>& path,
                           const SymMatrix& sigma_hat_full, const RegularizationGrid& grid, double n);
SelectionResult bic_select(const std::vector<PrecisionEstimate>& path,
                           const SymMatrix& sigma_hat_full, const RegularizationGrid& grid, double n);

// Deterministic shuffle of 0..n-1 dealt round-robin into `folds` folds, so
// fold sizes differ by at most one. Each fold is sorted.
std::vector<std::vector<int>> fold_assignment(int n, int folds, std::uint64_t seed);

// Average over folds of neg_log_likelihood(Omega_train(lambda), S_validation).
PathScores kcv_scores(const DataMatrix& data, const RegularizationGrid& grid,
                      const std::vector<std::vector<int>>& folds, const GlassoConfig& cfg,
                      int threads = 0);

// Picks the CV minimizer and reports the graph fitted on all rows at that
// point. `full_path` (the path on all rows) is reused when given.
SelectionResult kcv_select(const DataMatrix& data, const RegularizationGrid& grid, int folds,
                           const GlassoConfig& cfg, std::uint64_t seed,
                           const std::vector<PrecisionEstimate>* full_path = nullptr,
                           int threads = 0);

// Minimizes |E_hat symmetric-difference E| along the path.
SelectionResult oracle_select(const std::vector<PrecisionEstimate>& path, const EdgeSet& true_edges,
                              const RegularizationGrid& grid);

}  // namespace stars
