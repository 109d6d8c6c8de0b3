#pragma once

// StARS: subsample without replacement, estimate how often each edge appears
// at each grid point, turn the frequencies into per-edge instabilities
// 2 theta (1 - theta), average them, monotonize, and pick the largest capital
// lambda whose monotonized instability stays below the cut point beta.

#include <cstdint>
#include <optional>
#include <vector>

#include "stars/glasso.hpp"
#include "stars/selection.hpp"

namespace stars {

inline constexpr double kDefaultBeta = 0.05;
inline constexpr int kDefaultSubsamples = 100;

struct SubsamplePlan {
  int n = 0;
  int b = 0;
  int count = 0;
  std::uint64_t seed = 0;
  // count sorted lists of b distinct row indices in [0, n).
  std::vector<std::vector<int>> index_sets;
};

// min(floor(10 sqrt(n)), n - 1).
int default_block_size(int n);

// Subsample j is drawn from derive_seed(seed, j), independent of the others.
SubsamplePlan make_plan(int n, int count, std::uint64_t seed,
                        std::optional<int> b_override = std::nullopt);

// b distinct indices from [0, n), sorted.
std::vector<int> draw_subsample(int n, int b, std::uint64_t seed);

// The extra size-b subsample on which the selected graph is re-estimated.
// Its stream is disjoint from every plan subsample.
std::vector<int> refit_subsample(const SubsamplePlan& plan);

// One p x p slice per grid point; entries are counts / N, diagonal zero.
using EdgeTensor = std::vector<Matrix>;

// Edge sets [subsample][grid index], each subsample fitted with glasso_path.
std::vector<std::vector<EdgeSet>> subsample_edge_sets(const DataMatrix& data,
                                                      const SubsamplePlan& plan,
                                                      const RegularizationGrid& grid,
                                                      const GlassoConfig& cfg, int threads = 0);

EdgeTensor edge_frequencies(const DataMatrix& data, const SubsamplePlan& plan,
                            const RegularizationGrid& grid, const GlassoConfig& cfg,
                            int threads = 0);

struct StabilityProfile {
  RegularizationGrid grid;
  EdgeTensor theta_hat;
  EdgeTensor xi_hat;
  std::vector<double> d_hat;
  std::vector<double> d_bar;

  // Grid points actually evaluated; equals grid.size() unless the profile was
  // truncated after the first point where d_hat exceeded beta.
  int evaluated() const noexcept { return static_cast<int>(d_hat.size()); }
  bool truncated() const noexcept { return evaluated() < grid.size(); }
};

// theta_hat may cover a prefix of the grid.
StabilityProfile instability_profile(const EdgeTensor& theta_hat, const RegularizationGrid& grid);

SelectionResult stars_select(const StabilityProfile& profile, double beta = kDefaultBeta);

struct StarsConfig {
  int subsamples = kDefaultSubsamples;
  std::optional<int> block_size;
  double beta = kDefaultBeta;
  // Stop evaluating the grid after the first point with d_hat > beta. The
  // selection is unchanged: every later point has d_bar > beta.
  bool stop_when_unstable = false;
  // Re-estimate the reported graph on all n rows instead of a size-b subsample.
  bool refit_full = false;
  std::uint64_t seed = 1;
  int threads = 0;

  void validate() const;
};

// Fits every subsample at every grid point in lock-step, warm-starting each
// subsample from its own previous fit.
StabilityProfile stability_profile(const DataMatrix& data, const SubsamplePlan& plan,
                                   const RegularizationGrid& grid, const GlassoConfig& cfg,
                                   double beta, bool stop_when_unstable, int threads = 0);

struct StarsRun {
  SubsamplePlan plan;
  StabilityProfile profile;
  SelectionResult selection;
};

// Plan, profile, select, and re-estimate the graph at the chosen point.
StarsRun run_stars(const DataMatrix& data, const RegularizationGrid& grid,
                   const GlassoConfig& glasso_cfg, const StarsConfig& stars_cfg);

}  // namespace stars
