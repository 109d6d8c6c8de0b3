#pragma once

// Graphical lasso: minimize trace(S Omega) - log|Omega| + lambda * ||Omega||_1
// over positive definite Omega, by blockwise coordinate descent on
// W = Omega^{-1} with a coordinate-descent lasso for each column.

#include <vector>

#include "stars/edge_set.hpp"
#include "stars/numerics.hpp"

namespace stars {

inline constexpr double kDefaultZeroTol = 1e-8;
inline constexpr double kKktTol = 1e-4;

struct GlassoConfig {
  int max_outer_iters = 100;
  // Stop when the mean absolute change of W over a sweep falls below
  // tol * (mean absolute off-diagonal of S).
  double tol = 1e-4;
  int inner_max_iters = 1000;
  double inner_tol = 1e-6;
  bool penalize_diagonal = true;

  void validate() const;
};

struct PrecisionEstimate {
  SymMatrix omega;
  double lambda = 0.0;
  bool converged = false;
  // Outer sweeps used by the largest connected block.
  int iters = 0;
};

// K penalty values. Index k runs over lambdas in descending order, which is
// the same as capital lambdas (1 / lambda) in ascending order, so
// capital_lambda(k) == 1 / lambda(k) and index 0 is the sparsest end.
class RegularizationGrid {
 public:
  static RegularizationGrid from_lambdas(std::vector<double> descending);
  // K log-spaced values from lambda_max down to lambda_max * ratio.
  static RegularizationGrid log_spaced(double lambda_max, double ratio, int k);

  int size() const noexcept { return static_cast<int>(lambdas_.size()); }
  double lambda(int k) const { return lambdas_.at(static_cast<std::size_t>(k)); }
  double capital_lambda(int k) const { return capital_.at(static_cast<std::size_t>(k)); }
  const std::vector<double>& lambdas() const noexcept { return lambdas_; }
  const std::vector<double>& capital_lambdas() const noexcept { return capital_; }

 private:
  std::vector<double> lambdas_;
  std::vector<double> capital_;
};

// trace(sigma_hat * omega) - log|omega|, i.e. minus the profile
// log-likelihood per observation (up to constants and a factor of 2).
double neg_log_likelihood(const SymMatrix& omega, const SymMatrix& sigma_hat);

double penalized_objective(const SymMatrix& omega, const SymMatrix& sigma_hat, double lambda,
                           bool penalize_diagonal);

// Largest off-diagonal |s_ij|: smallest lambda giving an empty graph when the
// diagonal is penalized.
double lambda_max(const SymMatrix& sigma_hat);

PrecisionEstimate glasso_fit(const SymMatrix& sigma_hat, double lambda, const GlassoConfig& cfg,
                             const PrecisionEstimate* warm_start = nullptr);

// Fits from the sparsest grid point to the densest, warm-starting each fit
// from the previous one. Element k corresponds to grid index k. A positive
// `count` stops after the first `count` grid points.
std::vector<PrecisionEstimate> glasso_path(const SymMatrix& sigma_hat,
                                           const RegularizationGrid& grid,
                                           const GlassoConfig& cfg, int count = -1);

// Max violation of the subgradient optimality conditions:
// (Omega^{-1} - S)_ij = lambda * sign(Omega_ij) where Omega_ij != 0 and
// |(Omega^{-1} - S)_ij| <= lambda where Omega_ij == 0. Without diagonal
// penalization the diagonal condition is (Omega^{-1} - S)_ii = 0.
double kkt_residual(const PrecisionEstimate& est, const SymMatrix& sigma_hat,
                    bool penalize_diagonal);

EdgeSet edge_set(const PrecisionEstimate& est, double zero_tol = kDefaultZeroTol);
EdgeSet edge_set(const SymMatrix& omega, double zero_tol = kDefaultZeroTol);

}  // namespace stars
