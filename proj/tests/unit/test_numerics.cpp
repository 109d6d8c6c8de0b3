#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "stars/error.hpp"
#include "stars/numerics.hpp"

using namespace stars;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("SymMatrix keeps both triangles in sync") {
  SymMatrix m(3);
  m.set(0, 2, 1.5);
  CHECK(m(2, 0) == 1.5);
  CHECK(m(0, 2) == 1.5);
  CHECK(m.dense() == m.dense().transpose());
  CHECK_THROWS_AS(SymMatrix(1), Error);
}

TEST_CASE("from_dense rejects asymmetric and non-finite input") {
  Matrix a(2, 2);
  a << 1, 2, 3, 1;
  CHECK_THROWS_AS(SymMatrix::from_dense(a), Error);
  a << 1, NAN, NAN, 1;
  CHECK_THROWS_AS(SymMatrix::from_dense(a), Error);
  a << 1, 0.5, 0.5, 1;
  CHECK(SymMatrix::from_dense(a)(0, 1) == 0.5);
}

TEST_CASE("cholesky of small matrices") {
  const LowerTriangular li = cholesky(SymMatrix::identity(3));
  CHECK(max_abs_diff(li.factor(), Matrix::Identity(3, 3)) == 0.0);

  Matrix a(2, 2);
  a << 4, 2, 2, 5;
  const LowerTriangular l = cholesky(SymMatrix::from_dense(a));
  Matrix expected(2, 2);
  expected << 2, 0, 1, 2;
  CHECK(max_abs_diff(l.factor(), expected) <= 1e-15);
  CHECK(max_abs_diff(l.reconstruct(), a) <= 1e-14);
}

TEST_CASE("cholesky reconstructs random positive definite matrices") {
  for (std::uint32_t seed = 1; seed <= 20; ++seed) {
    const Matrix m = oracle::random_pd(5, seed);
    const LowerTriangular l = cholesky(SymMatrix::from_dense(m));
    CHECK(max_abs_diff(l.reconstruct(), m) <= 1e-10 * (1.0 + m.cwiseAbs().maxCoeff()));
    for (int i = 0; i < 5; ++i) {
      for (int j = i + 1; j < 5; ++j) CHECK(l.factor()(i, j) == 0.0);
    }
  }
}

TEST_CASE("cholesky flags matrices that are not positive definite") {
  Matrix a(2, 2);
  a << 1, 2, 2, 1;
  try {
    cholesky(SymMatrix::from_dense(a));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveDefinite);
  }
  a << 1, 1, 1, 1;
  CHECK_THROWS_AS(cholesky(SymMatrix::from_dense(a)), Error);
}

TEST_CASE("log_det examples") {
  CHECK(log_det(SymMatrix::identity(4)) == doctest::Approx(0.0));
  const std::vector<double> d{2.0, 2.0};
  CHECK(log_det(SymMatrix::diagonal(d)) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  for (std::uint32_t seed = 1; seed <= 10; ++seed) {
    const Matrix m = oracle::random_pd(6, seed);
    const double ref = std::log(oracle::determinant(oracle::to_rows(m)));
    CHECK(std::abs(log_det(SymMatrix::from_dense(m)) - ref) <= 1e-9);
  }
}

TEST_CASE("inverse examples") {
  CHECK(max_abs_diff(inverse(SymMatrix::identity(3)).dense(), Matrix::Identity(3, 3)) == 0.0);
  const std::vector<double> d{2.0, 4.0};
  const SymMatrix inv = inverse(SymMatrix::diagonal(d));
  CHECK(inv(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(inv(1, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(inv(0, 1) == 0.0);
  for (std::uint32_t seed = 1; seed <= 10; ++seed) {
    const Matrix m = oracle::random_pd(5, seed);
    const SymMatrix mi = inverse(SymMatrix::from_dense(m));
    const auto prod = oracle::product(oracle::to_rows(m), oracle::to_rows(mi.dense()));
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) CHECK(std::abs(prod[i][j] - (i == j ? 1.0 : 0.0)) <= 1e-9);
    }
  }
}

TEST_CASE("log_det of a matrix and of its inverse cancel") {
  for (std::uint32_t seed = 1; seed <= 10; ++seed) {
    const SymMatrix m = SymMatrix::from_dense(oracle::random_pd(7, seed, 0.5));
    CHECK(std::abs(log_det(m) + log_det(inverse(m))) <= 1e-8);
  }
}

TEST_CASE("sample_covariance matches the two-pass formula") {
  const DataMatrix x = sample_gaussian(SymMatrix::from_dense(oracle::random_pd(4, 3)), 50, 9);
  std::vector<int> all(50);
  for (int i = 0; i < 50; ++i) all[i] = i;
  const std::vector<int> some{1, 4, 5, 9, 20, 33, 49};
  for (const auto& rows : {all, some}) {
    const auto ref = oracle::covariance(x, rows);
    const SymMatrix s = rows.size() == 50 ? sample_covariance(x) : sample_covariance(x, rows);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) CHECK(std::abs(s(i, j) - ref[i][j]) <= 1e-12);
    }
  }
}

TEST_CASE("sample_gaussian identity covariance, n = 10000") {
  const DataMatrix x = sample_gaussian(SymMatrix::identity(2), 10000, 2024);
  const SymMatrix s = sample_covariance(x);
  CHECK(max_abs_diff(s.dense(), Matrix::Identity(2, 2)) <= 0.1);
}

TEST_CASE("sample_gaussian correlation 0.9") {
  Matrix sig(2, 2);
  sig << 1, 0.9, 0.9, 1;
  const DataMatrix x = sample_gaussian(SymMatrix::from_dense(sig), 10000, 77);
  const SymMatrix s = sample_covariance(x);
  const double corr = s(0, 1) / std::sqrt(s(0, 0) * s(1, 1));
  CHECK(std::abs(corr - 0.9) <= 0.05);
}

TEST_CASE("sample_gaussian is reproducible per seed") {
  const SymMatrix sig = SymMatrix::from_dense(oracle::random_pd(3, 5));
  const DataMatrix a = sample_gaussian(sig, 200, 42);
  const DataMatrix b = sample_gaussian(sig, 200, 42);
  const DataMatrix c = sample_gaussian(sig, 200, 43);
  CHECK(a == b);
  CHECK(!(a == c));
}

TEST_CASE("Rng helpers") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2, 0) != derive_seed(1, 2, 1));
}

TEST_CASE("Rng normals have unit variance") {
  Rng rng(11);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) <= 0.01);
  CHECK(std::abs(sq / n - 1.0) <= 0.02);
}
