#include "stars/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stars/error.hpp"
#include "stars/parallel.hpp"

namespace stars {

namespace {

void check_path(const std::vector<PrecisionEstimate>& path, const RegularizationGrid& grid) {
  if (static_cast<int>(path.size()) != grid.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "path has " + std::to_string(path.size()) + " estimates for a grid of " +
                    std::to_string(grid.size()));
  }
}

SelectionResult make_result(Method method, int index, const RegularizationGrid& grid,
                            EdgeSet edges) {
  SelectionResult r;
  r.method = method;
  r.chosen_index = index;
  r.chosen_capital_lambda = grid.capital_lambda(index);
  r.chosen_lambda = grid.lambda(index);
  r.edge_set = std::move(edges);
  return r;
}

SelectionResult select_by_criterion(const std::vector<PrecisionEstimate>& path,
                                    const SymMatrix& sigma_hat_full,
                                    const RegularizationGrid& grid, double n, Method method) {
  const PathScores scores = information_criterion(path, sigma_hat_full, grid, n, method);
  const int best = argmin_prefer_sparse(scores.scores);
  SelectionResult r =
      make_result(method, best, grid, edge_set(path[static_cast<std::size_t>(best)]));
  r.curves["score"] = scores.scores;
  std::vector<double> dof;
  for (const auto& est : path) {
    dof.push_back(static_cast<double>(degrees_of_freedom(est, static_cast<int>(est.omega.dim()))));
  }
  r.curves["degrees_of_freedom"] = std::move(dof);
  r.diagnostics["score_at_selection"] = scores.scores[static_cast<std::size_t>(best)];
  r.diagnostics["n"] = n;
  return r;
}

}  // namespace

long long degrees_of_freedom(const PrecisionEstimate& est, int p) {
  const long long m = edge_set(est).count();
  return m * (m - 1) / 2 + p;
}

double minus_two_log_likelihood(const PrecisionEstimate& est, const SymMatrix& sigma_hat,
                                double n) {
  return n * neg_log_likelihood(est.omega, sigma_hat);
}

PathScores information_criterion(const std::vector<PrecisionEstimate>& path,
                                 const SymMatrix& sigma_hat_full, const RegularizationGrid& grid,
                                 double n, Method method) {
  check_path(path, grid);
  if (method != Method::Aic && method != Method::Bic) {
    throw Error(ErrorCode::InvalidArgument, "information_criterion supports aic and bic only");
  }
  if (!(n > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample size must be positive");
  }
  const double per_dof = method == Method::Aic ? 2.0 : std::log(n);
  const int p = static_cast<int>(sigma_hat_full.dim());
  PathScores out{grid, {}, method};
  out.scores.reserve(path.size());
  for (const auto& est : path) {
    const double dof = static_cast<double>(degrees_of_freedom(est, p));
    out.scores.push_back(minus_two_log_likelihood(est, sigma_hat_full, n) + per_dof * dof);
  }
  return out;
}

SelectionResult aic_select(const std::vector<PrecisionEstimate>& path,
                           const SymMatrix& sigma_hat_full, const RegularizationGrid& grid, double n) {
  return select_by_criterion(path, sigma_hat_full, grid, n, Method::Aic);
}

SelectionResult bic_select(const std::vector<PrecisionEstimate>& path,
                           const SymMatrix& sigma_hat_full, const RegularizationGrid& grid, double n) {
  return select_by_criterion(path, sigma_hat_full, grid, n, Method::Bic);
}

std::vector<std::vector<int>> fold_assignment(int n, int folds, std::uint64_t seed) {
  if (folds < 2) {
    throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least 2 folds");
  }
  if (n < folds) {
    throw Error(ErrorCode::InvalidArgument, "cross-validation needs n >= folds");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i % folds)].push_back(order[static_cast<std::size_t>(i)]);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

PathScores kcv_scores(const DataMatrix& data, const RegularizationGrid& grid,
                      const std::vector<std::vector<int>>& folds, const GlassoConfig& cfg,
                      int threads) {
  const int n = static_cast<int>(data.rows());
  const auto n_folds = static_cast<int>(folds.size());
  std::vector<std::vector<double>> fold_scores(folds.size());
  parallel_for(n_folds, threads, [&](int f) {
    const auto& validation = folds[static_cast<std::size_t>(f)];
    std::vector<char> held_out(static_cast<std::size_t>(n), 0);
    for (int i : validation) held_out[static_cast<std::size_t>(i)] = 1;
    std::vector<int> training;
    for (int i = 0; i < n; ++i) {
      if (held_out[static_cast<std::size_t>(i)] == 0) training.push_back(i);
    }
    if (training.size() < 2 || validation.empty()) {
      throw Error(ErrorCode::InvalidArgument,
                  "fold " + std::to_string(f) + " leaves too few rows for training/validation");
    }
    try {
      const SymMatrix s_train = sample_covariance(data, training);
      const SymMatrix s_val = sample_covariance(data, validation);
      const auto path = glasso_path(s_train, grid, cfg);
      auto& scores = fold_scores[static_cast<std::size_t>(f)];
      for (const auto& est : path) scores.push_back(neg_log_likelihood(est.omega, s_val));
    } catch (const Error& e) {
      throw e.annotated("fold " + std::to_string(f));
    }
  });
  PathScores out{grid, std::vector<double>(static_cast<std::size_t>(grid.size()), 0.0), Method::Kcv};
  // Fixed fold order keeps the sum reproducible.
  for (const auto& scores : fold_scores) {
    for (int k = 0; k < grid.size(); ++k) {
      out.scores[static_cast<std::size_t>(k)] += scores[static_cast<std::size_t>(k)];
    }
  }
  for (double& s : out.scores) s /= n_folds;
  return out;
}

SelectionResult kcv_select(const DataMatrix& data, const RegularizationGrid& grid, int folds,
                           const GlassoConfig& cfg, std::uint64_t seed,
                           const std::vector<PrecisionEstimate>* full_path, int threads) {
  const auto assignment = fold_assignment(static_cast<int>(data.rows()), folds, seed);
  const PathScores scores = kcv_scores(data, grid, assignment, cfg, threads);
  const int best = argmin_prefer_sparse(scores.scores);
  EdgeSet edges;
  if (full_path != nullptr) {
    check_path(*full_path, grid);
    edges = edge_set((*full_path)[static_cast<std::size_t>(best)]);
  } else {
    try {
      const auto path = glasso_path(sample_covariance(data), grid, cfg, best + 1);
      edges = edge_set(path.back());
    } catch (const Error& e) {
      throw e.annotated("K-CV full-data refit");
    }
  }
  SelectionResult r = make_result(Method::Kcv, best, grid, std::move(edges));
  r.curves["score"] = scores.scores;
  r.diagnostics["folds"] = folds;
  r.diagnostics["score_at_selection"] = scores.scores[static_cast<std::size_t>(best)];
  return r;
}

SelectionResult oracle_select(const std::vector<PrecisionEstimate>& path, const EdgeSet& true_edges,
                              const RegularizationGrid& grid) {
  check_path(path, grid);
  std::vector<double> distance;
  std::vector<EdgeSet> sets;
  for (const auto& est : path) {
    sets.push_back(edge_set(est));
    distance.push_back(static_cast<double>(sets.back().distance(true_edges)));
  }
  const int best = argmin_prefer_sparse(distance);
  SelectionResult r =
      make_result(Method::Oracle, best, grid, std::move(sets[static_cast<std::size_t>(best)]));
  r.curves["edge_distance"] = distance;
  r.diagnostics["edge_distance"] = distance[static_cast<std::size_t>(best)];
  return r;
}

}  // namespace stars
