#include "latbound/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "latbound/errors.hpp"
#include "latbound/kernels.hpp"

namespace latbound::linalg {

double Matrix::asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    }
  }
  return m;
}

void Matrix::symmetrize() {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
      (*this)(i, j) = v;
      (*this)(j, i) = v;
    }
  }
}

void multiply(const Matrix& a, std::span<const double> x, std::span<double> y) {
  const auto dot = kernels::active().dot;
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = dot(a.row(i), x);
}

namespace {

lapack_int as_lapack(std::size_t n) { return static_cast<lapack_int>(n); }

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    throw ConvergenceError(std::string(routine) + " failed with info=" + std::to_string(info));
  }
}

}  // namespace

EigenDecomposition eigh(const Matrix& a, bool with_vectors) {
  EigenDecomposition out;
  out.n = a.size();
  out.values.resize(a.size());
  if (a.size() == 0) return out;
  // Row-major lower == column-major upper; for symmetric input either works.
  std::vector<double> work(a.data().begin(), a.data().end());
  const lapack_int n = as_lapack(a.size());
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, with_vectors ? 'V' : 'N', 'L', n,
                                         work.data(), n, out.values.data());
  check_info(info, "dsyevd");
  if (with_vectors) out.vectors = std::move(work);
  return out;
}

std::vector<double> eigvalsh(const Matrix& a) { return eigh(a, false).values; }

Eigenpair largest_eigenpair_dense(const Matrix& a) {
  const lapack_int n = as_lapack(a.size());
  std::vector<double> work(a.data().begin(), a.data().end());
  std::vector<double> w(a.size());
  std::vector<double> z(a.size());
  std::vector<lapack_int> isuppz(2);
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0, 0.0, n, n,
                     0.0, &found, w.data(), z.data(), n, isuppz.data());
  check_info(info, "dsyevr");
  if (found != 1) throw ConvergenceError("dsyevr returned no eigenvalue");
  return {w[0], std::move(z), 1};
}

namespace {

double norm2(std::span<const double> v) {
  return std::sqrt(kernels::active().dot(v, v));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

// Eigenpairs of the symmetric tridiagonal (alpha, beta), ascending.
void tridiagonal_eigen(std::vector<double> alpha, std::vector<double> beta,
                       std::vector<double>& values, std::vector<double>& vectors) {
  const auto m = alpha.size();
  vectors.assign(m * m, 0.0);
  beta.resize(m > 0 ? m - 1 : 0);
  const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', as_lapack(m), alpha.data(),
                                        beta.data(), vectors.data(), as_lapack(m));
  check_info(info, "dstev");
  values = std::move(alpha);
}

}  // namespace

Eigenpair largest_eigenpair_lanczos(const Matrix& a, std::span<const double> start,
                                    double rtol, int krylov_dim, int max_restarts) {
  const std::size_t n = a.size();
  if (n == 0) throw DomainError("empty matrix");
  const auto m_max = static_cast<std::size_t>(std::min<std::size_t>(krylov_dim, n));
  const auto dot = kernels::active().dot;

  std::vector<double> v(n);
  if (start.size() == n && norm2(start) > 0.0) {
    std::copy(start.begin(), start.end(), v.begin());
  } else {
    // Deterministic, non-degenerate default start.
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * std::sin(static_cast<double>(i) + 1.0);
  }
  {
    const double s = 1.0 / norm2(v);
    for (double& x : v) x *= s;
  }

  std::vector<double> basis;  // m_max x n, row j is the j-th Lanczos vector
  std::vector<double> w(n), ritz(n), av(n);
  Eigenpair out;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    basis.assign(m_max * n, 0.0);
    std::copy(v.begin(), v.end(), basis.begin());
    std::vector<double> alpha, beta;
    std::size_t m = 0;
    for (; m < m_max; ++m) {
      std::span<const double> q(basis.data() + m * n, n);
      multiply(a, q, w);
      ++out.iterations;
      const double al = dot(q, w);
      alpha.push_back(al);
      // Full reorthogonalization, applied twice.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j <= m; ++j) {
          std::span<const double> qj(basis.data() + j * n, n);
          axpy(-dot(qj, w), qj, w);
        }
      }
      const double b = norm2(w);
      if (m + 1 == m_max || b <= 1e-14 * std::max(1.0, std::abs(al))) {
        ++m;
        break;
      }
      beta.push_back(b);
      std::span<double> next(basis.data() + (m + 1) * n, n);
      for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / b;
    }
    alpha.resize(m);
    std::vector<double> tvals, tvecs;
    tridiagonal_eigen(alpha, beta, tvals, tvecs);
    const double theta = tvals[m - 1];
    std::fill(ritz.begin(), ritz.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      axpy(tvecs[(m - 1) * m + j], std::span<const double>(basis.data() + j * n, n), ritz);
    }
    const double s = 1.0 / norm2(ritz);
    for (double& x : ritz) x *= s;
    multiply(a, ritz, av);
    ++out.iterations;
    axpy(-theta, ritz, av);
    const double resid = norm2(av);
    v = ritz;
    out.value = theta;
    if (resid <= rtol * std::max(std::abs(theta), 1e-300)) {
      out.vector = std::move(v);
      return out;
    }
  }
  throw ConvergenceError("Lanczos did not converge");
}

Eigenpair largest_eigenpair(const Matrix& a, std::span<const double> start,
                            std::size_t dense_cutoff) {
  if (a.size() <= dense_cutoff) return largest_eigenpair_dense(a);
  return largest_eigenpair_lanczos(a, start);
}

double SignedLogDet::value() const {
  return sign == 0 ? 0.0 : static_cast<double>(sign) * std::exp(log_abs);
}

SignedLogDet log_determinant(const Matrix& a) {
  const lapack_int n = as_lapack(a.size());
  std::vector<double> work(a.data().begin(), a.data().end());
  std::vector<lapack_int> ipiv(a.size());
  const lapack_int info = LAPACKE_dgetrf(LAPACK_ROW_MAJOR, n, n, work.data(), n, ipiv.data());
  if (info < 0) check_info(info, "dgetrf");
  SignedLogDet out;
  if (info > 0) {
    out.sign = 0;
    out.log_abs = -INFINITY;
    return out;
  }
  for (lapack_int i = 0; i < n; ++i) {
    const double u = work[static_cast<std::size_t>(i) * a.size() + static_cast<std::size_t>(i)];
    if (u < 0) out.sign = -out.sign;
    if (ipiv[static_cast<std::size_t>(i)] != i + 1) out.sign = -out.sign;
    out.log_abs += std::log(std::abs(u));
  }
  return out;
}

}  // namespace latbound::linalg
