#include <immintrin.h>

#include <cmath>

#include "latbound/kernels.hpp"

namespace latbound::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

// E(K; p, q_j) for four consecutive columns starting at j.
inline __m256d symbol4(const SymbolRow& row, const ColumnTables& cols, std::size_t j) {
  const __m256d two = _mm256_set1_pd(2.0);
  __m256d e = _mm256_add_pd(_mm256_set1_pd(row.row_dispersion),
                            _mm256_loadu_pd(cols.dispersion.data() + j));
  for (int a = 0; a < cols.dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const __m256d cq = _mm256_loadu_pd(cols.cos_q[ua].data() + j);
    const __m256d sq = _mm256_loadu_pd(cols.sin_q[ua].data() + j);
    __m256d c = _mm256_mul_pd(_mm256_set1_pd(row.cos_a[ua]), cq);
    c = _mm256_fmadd_pd(_mm256_set1_pd(row.sin_a[ua]), sq, c);
    e = _mm256_add_pd(e, _mm256_fnmadd_pd(two, c, two));
  }
  return e;
}

inline double symbol1(const SymbolRow& row, const ColumnTables& cols, std::size_t j) {
  double e = row.row_dispersion + cols.dispersion[j];
  for (int a = 0; a < cols.dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double c = std::fma(row.sin_a[ua], cols.sin_q[ua][j], row.cos_a[ua] * cols.cos_q[ua][j]);
    e += std::fma(-2.0, c, 2.0);
  }
  return e;
}

}  // namespace

void three_body_symbol_row(const SymbolRow& row, const ColumnTables& cols,
                           std::span<double> out) {
  const std::size_t n = out.size();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) _mm256_storeu_pd(out.data() + j, symbol4(row, cols, j));
  for (; j < n; ++j) out[j] = symbol1(row, cols, j);
}

void nystrom_row(const SymbolRow& row, const ColumnTables& cols,
                 std::span<const double> col_scale, double row_scale, double z,
                 std::span<double> out) {
  const std::size_t n = out.size();
  const __m256d vz = _mm256_set1_pd(z);
  const __m256d vr = _mm256_set1_pd(row_scale);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d denom = abs_pd(_mm256_sub_pd(symbol4(row, cols, j), vz));
    const __m256d num = _mm256_mul_pd(vr, _mm256_loadu_pd(col_scale.data() + j));
    _mm256_storeu_pd(out.data() + j, _mm256_div_pd(num, denom));
  }
  for (; j < n; ++j) out[j] = row_scale * col_scale[j] / std::abs(symbol1(row, cols, j) - z);
}

ResolventMoments resolvent_moments(std::span<const double> symbol, double z,
                                   double weight) {
  const std::size_t n = symbol.size();
  const __m256d vz = _mm256_set1_pd(z);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d r = _mm256_div_pd(one, _mm256_sub_pd(_mm256_loadu_pd(symbol.data() + j), vz));
    s1 = _mm256_add_pd(s1, r);
    s2 = _mm256_fmadd_pd(r, r, s2);
  }
  double first = hsum(s1);
  double second = hsum(s2);
  for (; j < n; ++j) {
    const double r = 1.0 / (symbol[j] - z);
    first += r;
    second += r * r;
  }
  return {first * weight, second * weight};
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace latbound::kernels::avx2
