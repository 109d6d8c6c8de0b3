#pragma once

// Dense symmetric kernels: Cholesky, log-determinant, inverse, Gaussian
// sampling, and the seedable RNG used everywhere else.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace stars {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// n x p, one observation per row.
using DataMatrix = Eigen::MatrixXd;

// Pivots at or below this value mean "not positive definite".
inline constexpr double kPivotThreshold = 1e-12;

// Dense p x p matrix that is symmetric by construction: every write goes
// through set(), which mirrors the entry.
class SymMatrix {
 public:
  explicit SymMatrix(Eigen::Index dim);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix diagonal(std::span<const double> values);
  // Accepts a dense matrix whose asymmetry is at most `tol` (relative to its
  // largest entry) and stores the exact symmetric part.
  static SymMatrix from_dense(const Matrix& m, double tol = 1e-10);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  void set(Eigen::Index i, Eigen::Index j, double value) {
    m_(i, j) = value;
    m_(j, i) = value;
  }
  const Matrix& dense() const noexcept { return m_; }
  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

 private:
  SymMatrix() = default;
  Matrix m_;
};

class LowerTriangular {
 public:
  explicit LowerTriangular(Matrix factor) : l_(std::move(factor)) {}
  const Matrix& factor() const noexcept { return l_; }
  Eigen::Index dim() const noexcept { return l_.rows(); }
  Matrix reconstruct() const { return l_ * l_.transpose(); }

 private:
  Matrix l_;
};

LowerTriangular cholesky(const SymMatrix& m);
double log_det(const SymMatrix& m);
SymMatrix inverse(const SymMatrix& m);

// Raw-matrix versions used inside the solvers; same error contract.
Matrix cholesky_factor(const Matrix& m);
double log_det_pd(const Matrix& m);
Matrix inverse_pd(const Matrix& m);

// Maximum-likelihood covariance (divide by row count) after centering each
// column by its own mean. `rows` selects a subset; empty means all rows.
SymMatrix sample_covariance(const DataMatrix& data, std::span<const int> rows = {});

// Mixes a base seed with stream identifiers (splitmix64 finalizer), so task
// seeds depend only on (base, ids) and never on scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// std::mt19937_64 (whose output sequence is fixed by the C++ standard) plus
// hand-written uniform/normal transforms, so streams are reproducible across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();
  // Uniform integer in [0, bound), rejection-sampled, bound > 0.
  std::uint64_t below(std::uint64_t bound);

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

// n i.i.d. rows X = L Z with Z standard normal and L = cholesky(sigma).
DataMatrix sample_gaussian(const SymMatrix& sigma, int n, std::uint64_t seed);

}  // namespace stars
