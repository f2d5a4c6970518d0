#pragma once

// Data-parallel inner loops. Each kernel has a portable scalar reference in
// kernels::generic and, when the compiler supports it, an AVX2/FMA variant in
// kernels::avx2. The active variant is chosen once at startup from the CPU
// feature flags; LATBOUND_ISA=scalar|avx2 in the environment overrides it.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "latbound/torus.hpp"

namespace latbound::kernels {

/// Per-axis cosine and sine of the column momenta of a three-body row.
struct ColumnTables {
  int dim = 1;
  std::array<std::span<const double>, kMaxDim> cos_q{};
  std::array<std::span<const double>, kMaxDim> sin_q{};
  /// epsilon(q_j).
  std::span<const double> dispersion;
};

/// Row-constant data for E(K; p, q_j) = epsilon(K - p - q_j) + epsilon(p) +
/// epsilon(q_j), with A = K - p.
struct SymbolRow {
  std::array<double, kMaxDim> cos_a{};
  std::array<double, kMaxDim> sin_a{};
  double row_dispersion = 0.0;
};

/// Moments of the resolvent sum_j weight / (E_j - z)^m for m = 1, 2.
struct ResolventMoments {
  double first = 0.0;
  double second = 0.0;
};

using SymbolRowFn = void (*)(const SymbolRow& row, const ColumnTables& cols,
                             std::span<double> out);
/// out_j = row_scale * col_scale_j / |E(K; p, q_j) - z|.
using NystromRowFn = void (*)(const SymbolRow& row, const ColumnTables& cols,
                              std::span<const double> col_scale, double row_scale,
                              double z, std::span<double> out);
using ResolventFn = ResolventMoments (*)(std::span<const double> symbol, double z,
                                         double weight);
using DotFn = double (*)(std::span<const double> a, std::span<const double> b);

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  SymbolRowFn three_body_symbol_row;
  NystromRowFn nystrom_row;
  ResolventFn resolvent_moments;
  DotFn dot;
};

namespace generic {
void three_body_symbol_row(const SymbolRow& row, const ColumnTables& cols,
                           std::span<double> out);
void nystrom_row(const SymbolRow& row, const ColumnTables& cols,
                 std::span<const double> col_scale, double row_scale, double z,
                 std::span<double> out);
ResolventMoments resolvent_moments(std::span<const double> symbol, double z,
                                   double weight);
double dot(std::span<const double> a, std::span<const double> b);
}  // namespace generic

#if defined(LATBOUND_HAVE_AVX2)
namespace avx2 {
void three_body_symbol_row(const SymbolRow& row, const ColumnTables& cols,
                           std::span<double> out);
void nystrom_row(const SymbolRow& row, const ColumnTables& cols,
                 std::span<const double> col_scale, double row_scale, double z,
                 std::span<double> out);
ResolventMoments resolvent_moments(std::span<const double> symbol, double z,
                                   double weight);
double dot(std::span<const double> a, std::span<const double> b);
}  // namespace avx2
#endif

/// True when the variant was compiled in and the CPU supports it.
bool isa_available(Isa isa);
const KernelTable& table_for(Isa isa);
const KernelTable& active();
/// Switches the process-wide variant; throws DomainError if unavailable.
void set_active(Isa isa);
std::string_view isa_name(Isa isa);

/// Cosine/sine tables for a set of momenta, owning storage for ColumnTables.
class MomentumTables {
 public:
  explicit MomentumTables(std::span<const TorusPoint> points);
  ColumnTables columns() const;
  std::size_t size() const { return dispersion_.size(); }

 private:
  int dim_ = 1;
  std::array<std::vector<double>, kMaxDim> cos_;
  std::array<std::vector<double>, kMaxDim> sin_;
  std::vector<double> dispersion_;
};

SymbolRow make_symbol_row(const TorusPoint& K, const TorusPoint& p);

}  // namespace latbound::kernels
