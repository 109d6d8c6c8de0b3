#pragma once

// Ground-truth precision matrices (neighborhood and hub graphs) and the edge
// recovery metrics used to score estimated graphs.

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "stars/edge_set.hpp"
#include "stars/numerics.hpp"

namespace stars {

enum class GraphKind { Neighborhood, Hub };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view name);

inline constexpr double kNeighborhoodRho = 0.245;
inline constexpr int kHubGroupSize = 20;

struct GroundTruth {
  SymMatrix omega;
  SymMatrix sigma;
  EdgeSet edges;
  GraphKind kind;
  double rho;
  // Hub group size s; 0 for neighborhood graphs.
  int group_size;
  std::uint64_t seed;
};

// p points uniform on the unit square; pair (i, j) is linked with
// probability exp(-4 |y_i - y_j|^2) / sqrt(2 pi), visiting pairs in a seeded
// random order and rejecting links that would give an endpoint floor(1/rho)
// or more neighbours. Linked entries are rho, the diagonal is one.
GroundTruth gen_neighborhood(int p, double rho, std::uint64_t seed);

// floor(p/s) groups of s consecutive rows; the first row of each group is the
// pivot and is linked to the other s - 1 rows with weight 1 / (s + 1).
// Leftover rows stay isolated.
GroundTruth gen_hub(int p, int s, std::uint64_t seed);

struct EdgeMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Empty estimate: precision 1 if the truth is also empty, else 0. Empty
// truth: recall 1.
EdgeMetrics edge_metrics(const EdgeSet& estimated, const EdgeSet& truth);

// omega.csv, edges.tsv, meta.json under `dir` (created if needed).
void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& dir);
GroundTruth read_ground_truth(const std::filesystem::path& dir);

}  // namespace stars
