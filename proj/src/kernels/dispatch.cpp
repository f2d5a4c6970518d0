#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "latbound/errors.hpp"
#include "latbound/kernels.hpp"

namespace latbound::kernels {

namespace {

constexpr KernelTable kGeneric{Isa::scalar, generic::three_body_symbol_row,
                               generic::nystrom_row, generic::resolvent_moments,
                               generic::dot};

#if defined(LATBOUND_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, avx2::three_body_symbol_row, avx2::nystrom_row,
                            avx2::resolvent_moments, avx2::dot};
#endif

bool cpu_has_avx2() {
#if defined(LATBOUND_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* select_initial() {
  if (const char* env = std::getenv("LATBOUND_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &kGeneric;
#if defined(LATBOUND_HAVE_AVX2)
    if (want == "avx2" && cpu_has_avx2()) return &kAvx2;
#endif
  }
#if defined(LATBOUND_HAVE_AVX2)
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kGeneric;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{select_initial()};
  return table;
}

}  // namespace

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
  return cpu_has_avx2();
}

const KernelTable& table_for(Isa isa) {
#if defined(LATBOUND_HAVE_AVX2)
  if (isa == Isa::avx2) {
    if (!cpu_has_avx2()) throw DomainError("avx2 kernels not supported on this CPU");
    return kAvx2;
  }
#else
  if (isa == Isa::avx2) throw DomainError("avx2 kernels not compiled in");
#endif
  return kGeneric;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_active(Isa isa) { current().store(&table_for(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

MomentumTables::MomentumTables(std::span<const TorusPoint> points) {
  dim_ = points.empty() ? 1 : points.front().dim();
  for (int a = 0; a < dim_; ++a) {
    cos_[static_cast<std::size_t>(a)].reserve(points.size());
    sin_[static_cast<std::size_t>(a)].reserve(points.size());
  }
  dispersion_.reserve(points.size());
  for (const auto& p : points) {
    for (int a = 0; a < dim_; ++a) {
      cos_[static_cast<std::size_t>(a)].push_back(std::cos(p[a]));
      sin_[static_cast<std::size_t>(a)].push_back(std::sin(p[a]));
    }
    dispersion_.push_back(dispersion(p));
  }
}

ColumnTables MomentumTables::columns() const {
  ColumnTables t;
  t.dim = dim_;
  for (int a = 0; a < dim_; ++a) {
    t.cos_q[static_cast<std::size_t>(a)] = cos_[static_cast<std::size_t>(a)];
    t.sin_q[static_cast<std::size_t>(a)] = sin_[static_cast<std::size_t>(a)];
  }
  t.dispersion = dispersion_;
  return t;
}

SymbolRow make_symbol_row(const TorusPoint& K, const TorusPoint& p) {
  SymbolRow row;
  const TorusPoint a = K - p;
  for (int ax = 0; ax < a.dim(); ++ax) {
    row.cos_a[static_cast<std::size_t>(ax)] = std::cos(a[ax]);
    row.sin_a[static_cast<std::size_t>(ax)] = std::sin(a[ax]);
  }
  row.row_dispersion = dispersion(p);
  return row;
}

}  // namespace latbound::kernels
