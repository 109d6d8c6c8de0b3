#include "stars/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stars/error.hpp"

namespace stars {

SymMatrix::SymMatrix(Eigen::Index dim) : m_(Matrix::Zero(dim, dim)) {
  if (dim < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "SymMatrix dimension must be at least 2, got " + std::to_string(dim));
  }
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  SymMatrix s(dim);
  s.m_.setIdentity();
  return s;
}

SymMatrix SymMatrix::diagonal(std::span<const double> values) {
  SymMatrix s(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.m_(i, i) = values[i];
  }
  return s;
}

SymMatrix SymMatrix::from_dense(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw Error(ErrorCode::InvalidArgument, "matrix is not symmetric");
  }
  SymMatrix s(m.rows());
  s.m_ = 0.5 * (m + m.transpose());
  return s;
}

Matrix cholesky_factor(const Matrix& m) {
  const Eigen::Index p = m.rows();
  if (m.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky: matrix is not square");
  }
  Matrix l = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) {
      pivot -= l(j, k) * l(j, k);
    }
    if (!(pivot > kPivotThreshold)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "cholesky pivot " + std::to_string(pivot) + " at column " +
                      std::to_string(j));
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (Eigen::Index i = j + 1; i < p; ++i) {
      double v = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) {
        v -= l(i, k) * l(j, k);
      }
      l(i, j) = v / d;
    }
  }
  return l;
}

double log_det_pd(const Matrix& m) {
  const Matrix l = cholesky_factor(m);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    sum += std::log(l(i, i));
  }
  return 2.0 * sum;
}

Matrix inverse_pd(const Matrix& m) {
  const Matrix l = cholesky_factor(m);
  const Eigen::Index p = l.rows();
  // l_inv = L^{-1} by forward substitution; m^{-1} = L^{-T} L^{-1}.
  Matrix l_inv = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    l_inv(j, j) = 1.0 / l(j, j);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      double v = 0.0;
      for (Eigen::Index k = j; k < i; ++k) {
        v -= l(i, k) * l_inv(k, j);
      }
      l_inv(i, j) = v / l(i, i);
    }
  }
  Matrix inv = l_inv.transpose() * l_inv;
  return 0.5 * (inv + inv.transpose());
}

LowerTriangular cholesky(const SymMatrix& m) { return LowerTriangular(cholesky_factor(m.dense())); }

double log_det(const SymMatrix& m) { return log_det_pd(m.dense()); }

SymMatrix inverse(const SymMatrix& m) { return SymMatrix::from_dense(inverse_pd(m.dense()), 1e-8); }

SymMatrix sample_covariance(const DataMatrix& data, std::span<const int> rows) {
  const Eigen::Index p = data.cols();
  Matrix x;
  if (rows.empty()) {
    x = data;
  } else {
    x.resize(static_cast<Eigen::Index>(rows.size()), p);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = data.row(rows[r]);
    }
  }
  if (x.rows() < 1) {
    throw Error(ErrorCode::InvalidArgument, "sample_covariance: no rows");
  }
  if (!x.allFinite()) {
    throw Error(ErrorCode::NonFinite, "sample_covariance: non-finite data");
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Matrix s = (x.transpose() * x) / static_cast<double>(x.rows());
  return SymMatrix::from_dense(0.5 * (s + s.transpose()), 1e-8);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

Rng::Rng(std::uint64_t seed) : engine_(derive_seed(seed, 0x5354415253ULL)) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) {
    u1 = uniform();
  }
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Reject the low remainder so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = engine_();
    if (r >= threshold) {
      return r % bound;
    }
  }
}

DataMatrix sample_gaussian(const SymMatrix& sigma, int n, std::uint64_t seed) {
  if (n < 1) {
    throw Error(ErrorCode::InvalidArgument, "sample_gaussian: n must be >= 1");
  }
  const Matrix l = cholesky_factor(sigma.dense());
  const Eigen::Index p = l.rows();
  Rng rng(seed);
  Matrix z(n, p);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      z(i, j) = rng.normal();
    }
  }
  return z * l.transpose();
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidBlockSize: return "InvalidBlockSize";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::InvalidGroupSize: return "InvalidGroupSize";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace stars
