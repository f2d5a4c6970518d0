#include <cmath>

#include "latbound/kernels.hpp"

namespace latbound::kernels::generic {

void three_body_symbol_row(const SymbolRow& row, const ColumnTables& cols,
                           std::span<double> out) {
  const std::size_t n = out.size();
  for (std::size_t j = 0; j < n; ++j) {
    double e = row.row_dispersion + cols.dispersion[j];
    for (int a = 0; a < cols.dim; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const double c = row.cos_a[ua] * cols.cos_q[ua][j] + row.sin_a[ua] * cols.sin_q[ua][j];
      e += 2.0 - 2.0 * c;
    }
    out[j] = e;
  }
}

void nystrom_row(const SymbolRow& row, const ColumnTables& cols,
                 std::span<const double> col_scale, double row_scale, double z,
                 std::span<double> out) {
  three_body_symbol_row(row, cols, out);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = row_scale * col_scale[j] / std::abs(out[j] - z);
  }
}

ResolventMoments resolvent_moments(std::span<const double> symbol, double z,
                                   double weight) {
  ResolventMoments m;
  for (double e : symbol) {
    const double r = 1.0 / (e - z);
    m.first += r;
    m.second += r * r;
  }
  m.first *= weight;
  m.second *= weight;
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace latbound::kernels::generic
