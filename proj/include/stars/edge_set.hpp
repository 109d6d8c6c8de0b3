#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace stars {

struct Edge {
  int i;
  int j;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected simple graph on p vertices. Only the strict upper triangle is
// stored, so symmetry holds and self-loops cannot be represented.
class EdgeSet {
 public:
  EdgeSet() = default;
  explicit EdgeSet(int p);

  int dim() const noexcept { return p_; }
  bool has(int i, int j) const;
  void add(int i, int j);
  void remove(int i, int j);
  int count() const noexcept { return count_; }
  int degree(int i) const;
  // Edges with i < j, in row-major order.
  std::vector<Edge> edges() const;

  int intersection_size(const EdgeSet& other) const;
  // |this symmetric-difference other|.
  int distance(const EdgeSet& other) const;
  bool contains(const EdgeSet& other) const;

  static long long pair_count(int p) { return static_cast<long long>(p) * (p - 1) / 2; }

  friend bool operator==(const EdgeSet& a, const EdgeSet& b) {
    return a.p_ == b.p_ && a.bits_ == b.bits_;
  }

 private:
  std::size_t index(int i, int j) const;
  void check_same_dim(const EdgeSet& other) const;

  int p_ = 0;
  int count_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace stars
