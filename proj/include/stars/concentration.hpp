#pragma once

// Monte-Carlo check of the uniform concentration bounds for the subsampled
// instability estimates:
//   max_{s<t} |xi_hat - xi|    <= sqrt(18 b (2 log p + log(2/delta)) / n)
//   max_k |D_hat - D_b|        <= sqrt(18 b (log K + 4 log p + log(1/delta)) / n)
// The population quantities are replaced by means over independent datasets.

#include <cstdint>
#include <optional>
#include <vector>

#include "stars/glasso.hpp"
#include "stars/synth.hpp"

namespace stars {

struct ConcentrationConfig {
  int p = 8;
  GraphKind kind = GraphKind::Hub;
  int group_size = 4;
  double rho = kNeighborhoodRho;
  std::vector<int> n_values{100, 400, 1600};
  int trials = 200;
  // Datasets averaged to stand in for the expectation.
  int mc_datasets = 200;
  int subsamples = 50;
  // Same b for every n; std::nullopt means b = min(floor(10 sqrt n), n - 1).
  std::optional<int> block_size = 50;
  int grid_size = 10;
  double grid_ratio = 0.1;
  // Explicit penalty values (descending, any count >= 1) replace the grid.
  std::optional<std::vector<double>> lambdas;
  double delta = 0.05;
  std::uint64_t seed = 1;
  int threads = 0;
  GlassoConfig glasso;

  void validate() const;
};

struct ConcentrationCell {
  int n = 0;
  int p = 0;
  int b = 0;
  int k = 0;
  int trials = 0;
  double delta = 0.0;
  double bound_d = 0.0;
  double median_dev = 0.0;
  double mean_dev = 0.0;
  double max_dev = 0.0;
  double violation_fraction = 0.0;
  double bound_xi = 0.0;
  double median_xi_dev = 0.0;
  double max_xi_dev = 0.0;
  double xi_violation_fraction = 0.0;
};

struct ConcentrationReport {
  std::vector<double> lambdas;
  std::vector<ConcentrationCell> cells;
};

double d_hat_bound(int n, int b, int k, int p, double delta);
double xi_bound(int n, int b, int p, double delta);

ConcentrationReport check_concentration(const ConcentrationConfig& cfg);

}  // namespace stars
