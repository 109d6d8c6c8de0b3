#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "stars/error.hpp"
#include "stars/synth.hpp"

using namespace stars;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("stars_synth_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

void check_truth_consistent(const GroundTruth& t) {
  const int p = static_cast<int>(t.omega.dim());
  for (int i = 0; i < p; ++i) {
    CHECK(t.omega(i, i) == 1.0);
    for (int j = i + 1; j < p; ++j) CHECK((t.omega(i, j) != 0.0) == t.edges.has(i, j));
  }
  CHECK_NOTHROW(cholesky(t.omega));
  const Matrix prod = t.omega.dense() * t.sigma.dense();
  CHECK((prod - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() <= 1e-8);
}

}  // namespace

TEST_CASE("neighborhood graphs respect the degree cap") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GroundTruth t = gen_neighborhood(60, kNeighborhoodRho, seed);
    CHECK(t.kind == GraphKind::Neighborhood);
    CHECK(t.group_size == 0);
    for (int v = 0; v < 60; ++v) CHECK(t.edges.degree(v) <= 3);
    for (const Edge& e : t.edges.edges()) CHECK(t.omega(e.i, e.j) == kNeighborhoodRho);
    CHECK(t.edges.count() > 0);
    check_truth_consistent(t);
  }
  // A larger rho lowers the cap.
  const GroundTruth tight = gen_neighborhood(60, 0.4, 3);
  for (int v = 0; v < 60; ++v) CHECK(tight.edges.degree(v) <= 1);
}

TEST_CASE("neighborhood graphs are reproducible per seed") {
  const GroundTruth a = gen_neighborhood(40, kNeighborhoodRho, 9);
  const GroundTruth b = gen_neighborhood(40, kNeighborhoodRho, 9);
  const GroundTruth c = gen_neighborhood(40, kNeighborhoodRho, 10);
  CHECK(a.edges == b.edges);
  CHECK(a.omega.dense() == b.omega.dense());
  CHECK(!(a.edges == c.edges));
}

TEST_CASE("hub graph with p = 40") {
  const GroundTruth t = gen_hub(40, 20, 1);
  CHECK(t.kind == GraphKind::Hub);
  CHECK(t.rho == doctest::Approx(1.0 / 21.0).epsilon(1e-15));
  CHECK(t.edges.count() == 38);
  CHECK(t.edges.degree(0) == 19);
  CHECK(t.edges.degree(20) == 19);
  for (int i = 1; i < 20; ++i) {
    CHECK(t.edges.has(0, i));
    CHECK(t.edges.degree(i) == 1);
    CHECK(t.edges.has(20, 20 + i));
    CHECK(t.omega(0, i) == 1.0 / 21.0);
  }
  CHECK(!t.edges.has(0, 20));
  check_truth_consistent(t);
}

TEST_CASE("hub graph with p = 100 and leftover rows") {
  const GroundTruth t = gen_hub(100, 20, 1);
  CHECK(t.edges.count() == 95);
  for (int v = 0; v < 100; ++v) CHECK(t.edges.degree(v) == (v % 20 == 0 ? 19 : 1));
  check_truth_consistent(t);

  const GroundTruth odd = gen_hub(23, 5, 1);
  CHECK(odd.edges.count() == 16);
  for (int v = 20; v < 23; ++v) CHECK(odd.edges.degree(v) == 0);

  CHECK_THROWS_AS(gen_hub(10, 1, 1), Error);
  CHECK_THROWS_AS(gen_hub(10, 10, 1), Error);
  CHECK_THROWS_AS(gen_neighborhood(10, 1.5, 1), Error);
  CHECK_THROWS_AS(gen_neighborhood(1, 0.2, 1), Error);
}

TEST_CASE("graph kind names") {
  CHECK(parse_graph_kind("hub") == GraphKind::Hub);
  CHECK(parse_graph_kind("neighborhood") == GraphKind::Neighborhood);
  CHECK(to_string(GraphKind::Hub) == "hub");
  CHECK_THROWS_AS(parse_graph_kind("star"), Error);
}

TEST_CASE("edge metrics examples") {
  EdgeSet truth(5);
  truth.add(0, 1);
  truth.add(1, 2);
  truth.add(2, 3);
  truth.add(3, 4);
  EdgeSet est(5);
  est.add(0, 1);
  est.add(1, 2);
  est.add(0, 4);
  const EdgeMetrics m = edge_metrics(est, truth);
  CHECK(m.precision == doctest::Approx(2.0 / 3.0));
  CHECK(m.recall == doctest::Approx(0.5));
  CHECK(m.f1 == doctest::Approx(2.0 * (2.0 / 3.0) * 0.5 / (2.0 / 3.0 + 0.5)));

  const EdgeMetrics same = edge_metrics(truth, truth);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);

  const EdgeMetrics none = edge_metrics(EdgeSet(5), truth);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  const EdgeMetrics both_empty = edge_metrics(EdgeSet(5), EdgeSet(5));
  CHECK(both_empty.precision == 1.0);
  CHECK(both_empty.recall == 1.0);
}

TEST_CASE("edge metrics stay in the unit interval") {
  const GroundTruth t = gen_neighborhood(30, kNeighborhoodRho, 4);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    EdgeSet est(30);
    for (int i = 0; i < 30; ++i) {
      for (int j = i + 1; j < 30; ++j) {
        if (rng.uniform() < 0.05 * static_cast<double>(seed % 5)) est.add(i, j);
      }
    }
    const EdgeMetrics m = edge_metrics(est, t.edges);
    for (double v : {m.precision, m.recall, m.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
    CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-15);
  }
}

TEST_CASE("ground truth round-trips through disk") {
  for (const GroundTruth& t : {gen_hub(30, 6, 4), gen_neighborhood(25, kNeighborhoodRho, 8)}) {
    const auto dir = scratch_dir(std::string(to_string(t.kind)));
    write_ground_truth(t, dir);
    CHECK(std::filesystem::exists(dir / "omega.csv"));
    CHECK(std::filesystem::exists(dir / "edges.tsv"));
    CHECK(std::filesystem::exists(dir / "meta.json"));
    const GroundTruth back = read_ground_truth(dir);
    CHECK(back.omega.dense() == t.omega.dense());
    CHECK(back.edges == t.edges);
    CHECK(back.kind == t.kind);
    CHECK(back.rho == t.rho);
    CHECK(back.group_size == t.group_size);
    CHECK(back.seed == t.seed);
    CHECK((back.sigma.dense() - t.sigma.dense()).cwiseAbs().maxCoeff() <= 1e-12);
    std::filesystem::remove_all(dir);
  }
  CHECK_THROWS_AS(read_ground_truth(scratch_dir("missing")), Error);
}
