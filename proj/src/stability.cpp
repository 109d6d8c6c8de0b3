#include "stars/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stars/error.hpp"
#include "stars/parallel.hpp"

namespace stars {

namespace {

// Stream id for the refit subsample; plan subsamples use ids 0..N-1.
constexpr std::uint64_t kRefitStream = 0xfffffffffffff00dULL;

void check_plan(const DataMatrix& data, const SubsamplePlan& plan) {
  if (data.rows() != plan.n) {
    throw Error(ErrorCode::DimensionMismatch,
                "data has " + std::to_string(data.rows()) + " rows but plan expects " +
                    std::to_string(plan.n));
  }
}

// Adds edge indicators of `edges` into the counts matrix (upper triangle).
void accumulate(const EdgeSet& edges, Eigen::MatrixXi& counts) {
  for (const Edge& e : edges.edges()) {
    counts(e.i, e.j) += 1;
  }
}

Matrix frequencies_from_counts(const Eigen::MatrixXi& counts, int n_subsamples) {
  const Eigen::Index p = counts.rows();
  Matrix theta = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double t = static_cast<double>(counts(i, j)) / n_subsamples;
      theta(i, j) = t;
      theta(j, i) = t;
    }
  }
  return theta;
}

}  // namespace

int default_block_size(int n) {
  const int b = static_cast<int>(std::floor(10.0 * std::sqrt(static_cast<double>(n))));
  return std::min(b, n - 1);
}

std::vector<int> draw_subsample(int n, int b, std::uint64_t seed) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first b slots are a uniform b-subset.
  for (int i = 0; i < b; ++i) {
    const auto r = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(i + r)]);
  }
  idx.resize(static_cast<std::size_t>(b));
  std::sort(idx.begin(), idx.end());
  return idx;
}

SubsamplePlan make_plan(int n, int count, std::uint64_t seed, std::optional<int> b_override) {
  if (n < 4) {
    throw Error(ErrorCode::InvalidArgument, "subsampling needs n >= 4");
  }
  if (count < 1) {
    throw Error(ErrorCode::InvalidArgument, "number of subsamples must be >= 1");
  }
  const int b = b_override.value_or(default_block_size(n));
  if (b <= 1 || b >= n) {
    throw Error(ErrorCode::InvalidBlockSize,
                "block size " + std::to_string(b) + " must satisfy 1 < b < n = " +
                    std::to_string(n));
  }
  SubsamplePlan plan{n, b, count, seed, {}};
  plan.index_sets.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    plan.index_sets.push_back(draw_subsample(n, b, derive_seed(seed, static_cast<std::uint64_t>(j))));
  }
  return plan;
}

std::vector<int> refit_subsample(const SubsamplePlan& plan) {
  return draw_subsample(plan.n, plan.b, derive_seed(plan.seed, kRefitStream));
}

std::vector<std::vector<EdgeSet>> subsample_edge_sets(const DataMatrix& data,
                                                      const SubsamplePlan& plan,
                                                      const RegularizationGrid& grid,
                                                      const GlassoConfig& cfg, int threads) {
  check_plan(data, plan);
  std::vector<std::vector<EdgeSet>> out(static_cast<std::size_t>(plan.count));
  parallel_for(plan.count, threads, [&](int j) {
    try {
      const SymMatrix s = sample_covariance(data, plan.index_sets[static_cast<std::size_t>(j)]);
      auto path = glasso_path(s, grid, cfg);
      auto& row = out[static_cast<std::size_t>(j)];
      row.reserve(path.size());
      for (const auto& est : path) row.push_back(edge_set(est));
    } catch (const Error& e) {
      throw e.annotated("subsample " + std::to_string(j));
    }
  });
  return out;
}

EdgeTensor edge_frequencies(const DataMatrix& data, const SubsamplePlan& plan,
                            const RegularizationGrid& grid, const GlassoConfig& cfg,
                            int threads) {
  const auto sets = subsample_edge_sets(data, plan, grid, cfg, threads);
  const auto p = data.cols();
  EdgeTensor theta;
  theta.reserve(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) {
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(p, p);
    for (const auto& row : sets) accumulate(row[static_cast<std::size_t>(k)], counts);
    theta.push_back(frequencies_from_counts(counts, plan.count));
  }
  return theta;
}

StabilityProfile instability_profile(const EdgeTensor& theta_hat, const RegularizationGrid& grid) {
  if (theta_hat.empty() || static_cast<int>(theta_hat.size()) > grid.size()) {
    throw Error(ErrorCode::DimensionMismatch, "edge-frequency tensor does not match the grid");
  }
  StabilityProfile prof{grid, theta_hat, {}, {}, {}};
  const Eigen::Index p = theta_hat.front().rows();
  const double pairs = static_cast<double>(EdgeSet::pair_count(static_cast<int>(p)));
  double running = 0.0;
  for (const Matrix& theta : theta_hat) {
    if (theta.rows() != p || theta.cols() != p) {
      throw Error(ErrorCode::DimensionMismatch, "edge-frequency slices differ in size");
    }
    Matrix xi = Matrix::Zero(p, p);
    double total = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double t = theta(i, j);
        const double x = 2.0 * t * (1.0 - t);
        xi(i, j) = x;
        xi(j, i) = x;
        total += x;
      }
    }
    const double d = total / pairs;
    running = std::max(running, d);
    prof.xi_hat.push_back(std::move(xi));
    prof.d_hat.push_back(d);
    prof.d_bar.push_back(running);
  }
  return prof;
}

SelectionResult stars_select(const StabilityProfile& profile, double beta) {
  if (!(beta > 0.0 && beta < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "beta must lie in (0, 0.5)");
  }
  if (profile.d_bar.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty stability profile");
  }
  // d_bar is nondecreasing, so the qualifying set is a prefix.
  int chosen = -1;
  for (int k = 0; k < profile.evaluated(); ++k) {
    if (profile.d_bar[static_cast<std::size_t>(k)] <= beta) chosen = k;
  }
  const bool saturated = chosen < 0;
  if (saturated) chosen = 0;

  SelectionResult r;
  r.method = Method::Stars;
  r.chosen_index = chosen;
  r.chosen_capital_lambda = profile.grid.capital_lambda(chosen);
  r.chosen_lambda = profile.grid.lambda(chosen);
  r.edge_set = EdgeSet(static_cast<int>(profile.theta_hat.front().rows()));
  r.diagnostics["beta"] = beta;
  r.diagnostics["saturated"] = saturated ? 1.0 : 0.0;
  r.diagnostics["d_bar_at_selection"] = profile.d_bar[static_cast<std::size_t>(chosen)];
  r.diagnostics["evaluated_grid_points"] = profile.evaluated();
  r.curves["d_hat"] = profile.d_hat;
  r.curves["d_bar"] = profile.d_bar;
  return r;
}

void StarsConfig::validate() const {
  if (subsamples < 1) {
    throw Error(ErrorCode::InvalidArgument, "number of subsamples must be >= 1");
  }
  if (!(beta > 0.0 && beta < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "beta must lie in (0, 0.5)");
  }
}

StabilityProfile stability_profile(const DataMatrix& data, const SubsamplePlan& plan,
                                   const RegularizationGrid& grid, const GlassoConfig& cfg,
                                   double beta, bool stop_when_unstable, int threads) {
  check_plan(data, plan);
  const auto n_sub = static_cast<std::size_t>(plan.count);
  const Eigen::Index p = data.cols();
  std::vector<SymMatrix> covs;
  covs.reserve(n_sub);
  for (const auto& rows : plan.index_sets) covs.push_back(sample_covariance(data, rows));

  std::vector<PrecisionEstimate> current(n_sub, PrecisionEstimate{SymMatrix(p), 0.0, false, 0});
  std::vector<EdgeSet> edges(n_sub);
  EdgeTensor theta;
  for (int k = 0; k < grid.size(); ++k) {
    const double lambda = grid.lambda(k);
    parallel_for(plan.count, threads, [&](int j) {
      const auto jj = static_cast<std::size_t>(j);
      try {
        current[jj] = glasso_fit(covs[jj], lambda, cfg, k == 0 ? nullptr : &current[jj]);
      } catch (const Error& e) {
        throw e.annotated("subsample " + std::to_string(j) + ", grid point " + std::to_string(k));
      }
      edges[jj] = edge_set(current[jj]);
    });
    // Integer counts summed in subsample order, divided once.
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(p, p);
    for (const auto& e : edges) accumulate(e, counts);
    theta.push_back(frequencies_from_counts(counts, plan.count));

    if (stop_when_unstable) {
      const auto prof = instability_profile(theta, grid);
      if (prof.d_hat.back() > beta) return prof;
    }
  }
  return instability_profile(theta, grid);
}

StarsRun run_stars(const DataMatrix& data, const RegularizationGrid& grid,
                   const GlassoConfig& glasso_cfg, const StarsConfig& stars_cfg) {
  stars_cfg.validate();
  StarsRun run;
  run.plan = make_plan(static_cast<int>(data.rows()), stars_cfg.subsamples, stars_cfg.seed,
                       stars_cfg.block_size);
  run.profile = stability_profile(data, run.plan, grid, glasso_cfg, stars_cfg.beta,
                                  stars_cfg.stop_when_unstable, stars_cfg.threads);
  run.selection = stars_select(run.profile, stars_cfg.beta);

  const int chosen = run.selection.chosen_index;
  const SymMatrix s = stars_cfg.refit_full ? sample_covariance(data)
                                           : sample_covariance(data, refit_subsample(run.plan));
  try {
    const auto path = glasso_path(s, grid, glasso_cfg, chosen + 1);
    run.selection.edge_set = edge_set(path.back());
  } catch (const Error& e) {
    throw e.annotated("StARS refit");
  }
  run.selection.diagnostics["block_size"] = run.plan.b;
  run.selection.diagnostics["subsamples"] = run.plan.count;
  run.selection.diagnostics["refit_full"] = stars_cfg.refit_full ? 1.0 : 0.0;
  return run;
}

}  // namespace stars
