#include "stars/edge_set.hpp"

#include <string>

#include "stars/error.hpp"

namespace stars {

EdgeSet::EdgeSet(int p) : p_(p), bits_(static_cast<std::size_t>(pair_count(p)), 0) {
  if (p < 2) {
    throw Error(ErrorCode::InvalidArgument, "EdgeSet needs at least 2 vertices");
  }
}

std::size_t EdgeSet::index(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= p_ || j >= p_) {
    throw Error(ErrorCode::InvalidArgument,
                "invalid edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  if (i > j) {
    std::swap(i, j);
  }
  // Row-major strict upper triangle.
  const auto ii = static_cast<std::size_t>(i);
  const auto pp = static_cast<std::size_t>(p_);
  return ii * pp - ii * (ii + 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

bool EdgeSet::has(int i, int j) const {
  if (i == j) {
    return false;
  }
  return bits_[index(i, j)] != 0;
}

void EdgeSet::add(int i, int j) {
  auto& b = bits_[index(i, j)];
  if (b == 0) {
    b = 1;
    ++count_;
  }
}

void EdgeSet::remove(int i, int j) {
  auto& b = bits_[index(i, j)];
  if (b != 0) {
    b = 0;
    --count_;
  }
}

int EdgeSet::degree(int i) const {
  int d = 0;
  for (int j = 0; j < p_; ++j) {
    if (j != i && has(i, j)) {
      ++d;
    }
  }
  return d;
}

std::vector<Edge> EdgeSet::edges() const {
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(count_));
  std::size_t k = 0;
  for (int i = 0; i < p_; ++i) {
    for (int j = i + 1; j < p_; ++j, ++k) {
      if (bits_[k] != 0) {
        out.push_back({i, j});
      }
    }
  }
  return out;
}

void EdgeSet::check_same_dim(const EdgeSet& other) const {
  if (other.p_ != p_) {
    throw Error(ErrorCode::DimensionMismatch,
                "edge sets on " + std::to_string(p_) + " and " + std::to_string(other.p_) +
                    " vertices");
  }
}

int EdgeSet::intersection_size(const EdgeSet& other) const {
  check_same_dim(other);
  int n = 0;
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    n += (bits_[k] & other.bits_[k]);
  }
  return n;
}

int EdgeSet::distance(const EdgeSet& other) const {
  check_same_dim(other);
  int n = 0;
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    n += (bits_[k] ^ other.bits_[k]);
  }
  return n;
}

bool EdgeSet::contains(const EdgeSet& other) const {
  return intersection_size(other) == other.count();
}

}  // namespace stars
