#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace latbound::linalg {

/// Dense real n x n matrix, row-major. Used for symmetric operators; the
/// storage holds both triangles.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// max |a_ij - a_ji|.
  double asymmetry() const;
  /// Replaces the matrix by (A + A^T) / 2.
  void symmetrize();

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// y = A x using the active dot kernel per row.
void multiply(const Matrix& a, std::span<const double> x, std::span<double> y);

struct EigenDecomposition {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // column j is the eigenvector of values[j], n x n column-major
  std::size_t n = 0;

  std::span<const double> vector(std::size_t j) const { return {vectors.data() + j * n, n}; }
};

/// All eigenvalues (and optionally eigenvectors) of a symmetric matrix via
/// LAPACK dsyevd. Only the lower triangle is read.
EigenDecomposition eigh(const Matrix& a, bool with_vectors = true);
std::vector<double> eigvalsh(const Matrix& a);

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;
  int iterations = 0;
};

/// Largest eigenpair via LAPACK dsyevr restricted to the top index.
Eigenpair largest_eigenpair_dense(const Matrix& a);

/// Largest eigenpair via restarted Lanczos with full reorthogonalization,
/// converged when ||A v - theta v|| <= rtol * |theta|. `start` may be empty.
Eigenpair largest_eigenpair_lanczos(const Matrix& a, std::span<const double> start,
                                    double rtol = 1e-12, int krylov_dim = 60,
                                    int max_restarts = 200);

/// Dense for small matrices, Lanczos with warm start above `dense_cutoff`.
Eigenpair largest_eigenpair(const Matrix& a, std::span<const double> start = {},
                            std::size_t dense_cutoff = 1024);

struct SignedLogDet {
  double log_abs = 0.0;
  int sign = 1;  // 0 for a singular matrix
  double value() const;
};

/// log|det A| and sign via LU factorization (dgetrf).
SignedLogDet log_determinant(const Matrix& a);

}  // namespace latbound::linalg
