#include "stars/glasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stars/error.hpp"

namespace stars {

void GlassoConfig::validate() const {
  if (!(tol > 0.0) || !(inner_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "glasso tolerances must be positive");
  }
  if (max_outer_iters < 1 || inner_max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "glasso iteration limits must be >= 1");
  }
}

RegularizationGrid RegularizationGrid::from_lambdas(std::vector<double> descending) {
  if (descending.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "regularization grid needs at least 2 points");
  }
  for (std::size_t k = 0; k < descending.size(); ++k) {
    if (!std::isfinite(descending[k]) || !(descending[k] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "grid lambdas must be positive and finite");
    }
    if (k > 0 && !(descending[k] < descending[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "grid lambdas must be strictly descending");
    }
  }
  RegularizationGrid g;
  g.capital_.reserve(descending.size());
  for (double l : descending) {
    g.capital_.push_back(1.0 / l);
  }
  // Store lambda as the reciprocal of the stored capital lambda so the two
  // views agree exactly.
  for (double c : g.capital_) {
    g.lambdas_.push_back(1.0 / c);
  }
  for (std::size_t k = 1; k < g.capital_.size(); ++k) {
    if (!(g.capital_[k] > g.capital_[k - 1]) || !(g.lambdas_[k] < g.lambdas_[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "grid points too close to be distinguished");
    }
  }
  return g;
}

RegularizationGrid RegularizationGrid::log_spaced(double lambda_max, double ratio, int k) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw Error(ErrorCode::InvalidArgument, "lambda_max must be positive");
  }
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "grid ratio must lie in (0, 1)");
  }
  if (k < 2) {
    throw Error(ErrorCode::InvalidArgument, "grid size must be >= 2");
  }
  std::vector<double> lambdas(static_cast<std::size_t>(k));
  const double log_hi = std::log(lambda_max);
  const double log_lo = std::log(lambda_max * ratio);
  for (int i = 0; i < k; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(k - 1);
    lambdas[static_cast<std::size_t>(i)] = std::exp(log_hi + t * (log_lo - log_hi));
  }
  lambdas.front() = lambda_max;
  return from_lambdas(std::move(lambdas));
}

namespace {

void check_dims(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimension " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// Connected components of the graph {(i,j) : |s_ij| > lambda}. The solution
// is block diagonal over these components, so each block is solved alone.
std::vector<std::vector<int>> threshold_components(const Matrix& s, double lambda) {
  const int p = static_cast<int>(s.rows());
  std::vector<int> parent(static_cast<std::size_t>(p));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < j; ++i) {
      if (std::abs(s(i, j)) > lambda) {
        const int ri = find(i);
        const int rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    groups[find(i)].push_back(i);
  }
  std::vector<std::vector<int>> out;
  for (auto& g : groups) {
    if (!g.empty()) out.push_back(std::move(g));
  }
  return out;
}

// Coordinate descent for
//   min_beta 0.5 beta' W11 beta - u' beta + lambda |beta|_1,
// where W11 is W without row/column j. `wb` holds W * beta on entry and exit.
void column_lasso(const Matrix& w, const Eigen::Ref<const Vector>& u, int j, double lambda,
                  Eigen::Ref<Vector> beta, Vector& wb, const GlassoConfig& cfg) {
  const int m = static_cast<int>(w.rows());
  auto pass = [&](bool active_only) {
    double max_delta = 0.0;
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      const double old = beta(k);
      if (active_only && old == 0.0) continue;
      const double wkk = w(k, k);
      const double c = u(k) - (wb(k) - wkk * old);
      const double updated = soft_threshold(c, lambda) / wkk;
      if (updated != old) {
        const double delta = updated - old;
        beta(k) = updated;
        wb.noalias() += delta * w.col(k);
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    return max_delta;
  };

  int it = 0;
  while (it < cfg.inner_max_iters) {
    ++it;
    if (pass(false) < cfg.inner_tol) break;
    while (it < cfg.inner_max_iters) {
      ++it;
      if (pass(true) < cfg.inner_tol) break;
    }
  }
}

struct BlockFit {
  Matrix omega;
  bool converged = false;
  int iters = 0;
};

// Recover Omega column by column: omega_jj = 1 / (w_jj - w12' beta),
// omega_12 = -beta * omega_jj. Throws if the result is not positive definite.
Matrix recover_omega(const Matrix& w, const Matrix& beta) {
  const auto m = w.rows();
  Matrix omega(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double denom = w(j, j);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != j) denom -= w(k, j) * beta(k, j);
    }
    if (!(denom > kPivotThreshold)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "non-positive Schur complement at column " + std::to_string(j));
    }
    omega.col(j) = -beta.col(j) / denom;
    omega(j, j) = 1.0 / denom;
  }
  Matrix sym = 0.5 * (omega + omega.transpose());
  cholesky_factor(sym);
  return sym;
}

double block_kkt_residual(const Matrix& omega, const Matrix& s, double lambda,
                          double diag_penalty) {
  const Matrix g = inverse_pd(omega) - s;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double v = omega(i, j);
      double r;
      if (i == j) {
        r = std::abs(g(i, i) - diag_penalty);
      } else if (std::abs(v) > kDefaultZeroTol) {
        r = std::abs(g(i, j) - lambda * (v > 0.0 ? 1.0 : -1.0));
      } else {
        r = std::max(0.0, std::abs(g(i, j)) - lambda);
      }
      worst = std::max(worst, r);
    }
  }
  return worst;
}

BlockFit solve_block(const Matrix& s, double lambda, const GlassoConfig& cfg,
                     const Matrix* warm_omega) {
  const int m = static_cast<int>(s.rows());
  const double diag_penalty = cfg.penalize_diagonal ? lambda : 0.0;

  Matrix w;
  Matrix beta = Matrix::Zero(m, m);
  if (warm_omega != nullptr) {
    w = inverse_pd(*warm_omega);
    for (int j = 0; j < m; ++j) {
      const double d = (*warm_omega)(j, j);
      beta.col(j) = -warm_omega->col(j) / d;
      beta(j, j) = 0.0;
    }
  } else {
    w = s;
  }
  for (int i = 0; i < m; ++i) {
    w(i, i) = s(i, i) + diag_penalty;
    if (!(w(i, i) > kPivotThreshold)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "diagonal entry " + std::to_string(i) +
                      " of S plus penalty is not positive; problem is unbounded");
    }
  }

  double mean_abs_off = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (i != j) mean_abs_off += std::abs(s(i, j));
    }
  }
  mean_abs_off /= static_cast<double>(m) * (m - 1);
  const double threshold = cfg.tol * (mean_abs_off > 0.0 ? mean_abs_off : 1.0);

  BlockFit fit;
  Vector wb(m);
  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    double change = 0.0;
    for (int j = 0; j < m; ++j) {
      auto b = beta.col(j);
      wb.setZero();
      for (int k = 0; k < m; ++k) {
        if (b(k) != 0.0) wb.noalias() += b(k) * w.col(k);
      }
      column_lasso(w, s.col(j), j, lambda, b, wb, cfg);
      for (int k = 0; k < m; ++k) {
        if (k == j) continue;
        change += std::abs(wb(k) - w(k, j));
        w(k, j) = wb(k);
        w(j, k) = wb(k);
      }
    }
    fit.iters = iter;
    // The W-change rule only proposes a stop; it is accepted once the
    // recovered estimate also passes the KKT check.
    if (change / (static_cast<double>(m) * (m - 1)) < threshold) {
      fit.omega = recover_omega(w, beta);
      if (block_kkt_residual(fit.omega, s, lambda, diag_penalty) <= kKktTol) {
        fit.converged = true;
        return fit;
      }
    }
  }
  fit.omega = recover_omega(w, beta);
  return fit;
}

}  // namespace

double neg_log_likelihood(const SymMatrix& omega, const SymMatrix& sigma_hat) {
  check_dims(omega, sigma_hat);
  const double trace = sigma_hat.dense().cwiseProduct(omega.dense()).sum();
  return trace - log_det(omega);
}

double penalized_objective(const SymMatrix& omega, const SymMatrix& sigma_hat, double lambda,
                           bool penalize_diagonal) {
  double l1 = omega.dense().cwiseAbs().sum();
  if (!penalize_diagonal) {
    l1 -= omega.dense().diagonal().cwiseAbs().sum();
  }
  return neg_log_likelihood(omega, sigma_hat) + lambda * l1;
}

double lambda_max(const SymMatrix& sigma_hat) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < sigma_hat.dim(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      best = std::max(best, std::abs(sigma_hat(i, j)));
    }
  }
  return best;
}

PrecisionEstimate glasso_fit(const SymMatrix& sigma_hat, double lambda, const GlassoConfig& cfg,
                             const PrecisionEstimate* warm_start) {
  cfg.validate();
  const Matrix& s = sigma_hat.dense();
  if (!s.allFinite() || !std::isfinite(lambda)) {
    throw Error(ErrorCode::NonFinite, "glasso input contains NaN or Inf");
  }
  if (lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  }
  if ((s.diagonal().array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "covariance has a negative diagonal entry");
  }
  const Eigen::Index p = sigma_hat.dim();
  if (warm_start != nullptr) {
    check_dims(warm_start->omega, sigma_hat);
  }

  const double diag_penalty = cfg.penalize_diagonal ? lambda : 0.0;
  Matrix omega = Matrix::Zero(p, p);
  PrecisionEstimate est{SymMatrix(p), lambda, true, 0};

  for (const auto& block : threshold_components(s, lambda)) {
    const auto m = static_cast<Eigen::Index>(block.size());
    if (m == 1) {
      const int i = block.front();
      const double d = s(i, i) + diag_penalty;
      if (!(d > kPivotThreshold)) {
        throw Error(ErrorCode::NotPositiveDefinite,
                    "diagonal entry " + std::to_string(i) +
                        " of S plus penalty is not positive; problem is unbounded");
      }
      omega(i, i) = 1.0 / d;
      continue;
    }
    Matrix sb(m, m);
    Matrix wb;
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        sb(a, b) = s(block[a], block[b]);
      }
    }
    if (warm_start != nullptr) {
      wb.resize(m, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
          wb(a, b) = warm_start->omega(block[a], block[b]);
        }
      }
    }
    BlockFit fit = solve_block(sb, lambda, cfg, warm_start != nullptr ? &wb : nullptr);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        omega(block[a], block[b]) = fit.omega(a, b);
      }
    }
    est.converged = est.converged && fit.converged;
    est.iters = std::max(est.iters, fit.iters);
  }
  est.omega = SymMatrix::from_dense(omega);
  return est;
}

std::vector<PrecisionEstimate> glasso_path(const SymMatrix& sigma_hat,
                                           const RegularizationGrid& grid,
                                           const GlassoConfig& cfg, int count) {
  const int last = count > 0 ? std::min(count, grid.size()) : grid.size();
  std::vector<PrecisionEstimate> path;
  path.reserve(static_cast<std::size_t>(last));
  for (int k = 0; k < last; ++k) {
    try {
      path.push_back(glasso_fit(sigma_hat, grid.lambda(k), cfg, path.empty() ? nullptr : &path.back()));
    } catch (const Error& e) {
      throw e.annotated("grid point " + std::to_string(k) + " (lambda " +
                        std::to_string(grid.lambda(k)) + ")");
    }
  }
  return path;
}

double kkt_residual(const PrecisionEstimate& est, const SymMatrix& sigma_hat,
                    bool penalize_diagonal) {
  check_dims(est.omega, sigma_hat);
  return block_kkt_residual(est.omega.dense(), sigma_hat.dense(), est.lambda,
                            penalize_diagonal ? est.lambda : 0.0);
}

EdgeSet edge_set(const SymMatrix& omega, double zero_tol) {
  const int p = static_cast<int>(omega.dim());
  EdgeSet e(p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < j; ++i) {
      if (std::abs(omega(i, j)) > zero_tol) e.add(i, j);
    }
  }
  return e;
}

EdgeSet edge_set(const PrecisionEstimate& est, double zero_tol) {
  return edge_set(est.omega, zero_tol);
}

}  // namespace stars
