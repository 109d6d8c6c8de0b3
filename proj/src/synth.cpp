#include "stars/synth.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "stars/error.hpp"
#include "stars/glasso.hpp"
#include "stars/io.hpp"

namespace stars {

std::string_view to_string(GraphKind kind) {
  return kind == GraphKind::Hub ? "hub" : "neighborhood";
}

GraphKind parse_graph_kind(std::string_view name) {
  if (name == "hub") return GraphKind::Hub;
  if (name == "neighborhood") return GraphKind::Neighborhood;
  throw Error(ErrorCode::Config,
              "unknown graph kind '" + std::string(name) + "' (expected hub or neighborhood)");
}

namespace {

GroundTruth finish_truth(SymMatrix omega, GraphKind kind, double rho, int s, std::uint64_t seed) {
  SymMatrix sigma = inverse(omega);
  EdgeSet edges = edge_set(omega, 0.0);
  return GroundTruth{std::move(omega), std::move(sigma), std::move(edges), kind, rho, s, seed};
}

}  // namespace

GroundTruth gen_neighborhood(int p, double rho, std::uint64_t seed) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::InvalidRho, "rho must lie in (0, 1), got " + std::to_string(rho));
  }
  if (p < 2) {
    throw Error(ErrorCode::InvalidArgument, "need p >= 2");
  }
  Rng point_rng(derive_seed(seed, 1));
  std::vector<double> x(static_cast<std::size_t>(p));
  std::vector<double> y(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    x[static_cast<std::size_t>(i)] = point_rng.uniform();
    y[static_cast<std::size_t>(i)] = point_rng.uniform();
  }

  std::vector<Edge> pairs;
  pairs.reserve(static_cast<std::size_t>(EdgeSet::pair_count(p)));
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) pairs.push_back({i, j});
  }
  Rng link_rng(derive_seed(seed, 2));
  link_rng.shuffle(pairs);

  const int degree_cap = static_cast<int>(std::floor(1.0 / rho));
  const double scale = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  std::vector<int> degree(static_cast<std::size_t>(p), 0);
  SymMatrix omega = SymMatrix::identity(p);
  for (const Edge& e : pairs) {
    const double dx = x[static_cast<std::size_t>(e.i)] - x[static_cast<std::size_t>(e.j)];
    const double dy = y[static_cast<std::size_t>(e.i)] - y[static_cast<std::size_t>(e.j)];
    const double prob = scale * std::exp(-4.0 * (dx * dx + dy * dy));
    // Always consume a draw so the stream does not depend on the degree state.
    const double u = link_rng.uniform();
    auto& di = degree[static_cast<std::size_t>(e.i)];
    auto& dj = degree[static_cast<std::size_t>(e.j)];
    if (u < prob && di + 1 < degree_cap && dj + 1 < degree_cap) {
      omega.set(e.i, e.j, rho);
      ++di;
      ++dj;
    }
  }
  return finish_truth(std::move(omega), GraphKind::Neighborhood, rho, 0, seed);
}

GroundTruth gen_hub(int p, int s, std::uint64_t seed) {
  if (s < 2 || s >= p) {
    throw Error(ErrorCode::InvalidGroupSize,
                "hub group size s = " + std::to_string(s) + " must satisfy 2 <= s < p = " +
                    std::to_string(p));
  }
  const double rho = 1.0 / (s + 1);
  const int groups = p / s;
  SymMatrix omega = SymMatrix::identity(p);
  for (int g = 0; g < groups; ++g) {
    const int pivot = g * s;
    for (int i = pivot + 1; i < pivot + s; ++i) omega.set(pivot, i, rho);
  }
  return finish_truth(std::move(omega), GraphKind::Hub, rho, s, seed);
}

EdgeMetrics edge_metrics(const EdgeSet& estimated, const EdgeSet& truth) {
  const double hits = estimated.intersection_size(truth);
  EdgeMetrics m;
  if (estimated.count() == 0) {
    m.precision = truth.count() == 0 ? 1.0 : 0.0;
  } else {
    m.precision = hits / estimated.count();
  }
  m.recall = truth.count() == 0 ? 1.0 : hits / truth.count();
  const double denom = m.precision + m.recall;
  m.f1 = denom > 0.0 ? 2.0 * m.precision * m.recall / denom : 0.0;
  return m;
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
  }
  io::write_matrix_csv(dir / "omega.csv", truth.omega.dense());
  io::write_edges_tsv(dir / "edges.tsv", truth.edges);
  nlohmann::ordered_json meta;
  meta["kind"] = to_string(truth.kind);
  meta["p"] = truth.omega.dim();
  meta["params"] = {{"rho", truth.rho}, {"s", truth.group_size}, {"seed", truth.seed}};
  meta["seed"] = truth.seed;
  meta["edges"] = truth.edges.count();
  io::write_text(dir / "meta.json", meta.dump(2) + "\n");
}

GroundTruth read_ground_truth(const std::filesystem::path& dir) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io::read_text(dir / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, (dir / "meta.json").string() + ": " + e.what());
  }
  SymMatrix omega = SymMatrix::from_dense(io::read_matrix_csv(dir / "omega.csv"));
  EdgeSet edges = io::read_edges_tsv(dir / "edges.tsv", static_cast<int>(omega.dim()));
  if (!(edges == edge_set(omega, 0.0))) {
    throw Error(ErrorCode::Io, dir.string() + ": edges.tsv disagrees with omega.csv");
  }
  SymMatrix sigma = inverse(omega);
  const auto& params = meta.at("params");
  return GroundTruth{std::move(omega),
                     std::move(sigma),
                     std::move(edges),
                     parse_graph_kind(meta.at("kind").get<std::string>()),
                     params.at("rho").get<double>(),
                     params.at("s").get<int>(),
                     meta.at("seed").get<std::uint64_t>()};
}

}  // namespace stars
