#include "latbound/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "latbound/errors.hpp"

namespace latbound::oracle {

namespace {

int mod(int a, int L) { return ((a % L) + L) % L; }

// Flat index of an L-grid momentum, axis 0 slowest.
struct Lattice {
  int d;
  int L;
  std::size_t size;

  Lattice(int d_, int L_) : d(d_), L(L_), size(d_ == 1 ? std::size_t(L_) : std::size_t(L_) * L_) {}

  Index index(std::size_t flat) const {
    if (d == 1) return {static_cast<int>(flat), 0};
    return {static_cast<int>(flat / static_cast<std::size_t>(L)),
            static_cast<int>(flat % static_cast<std::size_t>(L))};
  }
  std::size_t flat(const Index& m) const {
    if (d == 1) return static_cast<std::size_t>(mod(m[0], L));
    return static_cast<std::size_t>(mod(m[0], L)) * static_cast<std::size_t>(L) +
           static_cast<std::size_t>(mod(m[1], L));
  }
  // K - a - b on the grid.
  std::size_t rest(const Index& K, std::size_t a, std::size_t b) const {
    const Index ia = index(a), ib = index(b);
    return flat({K[0] - ia[0] - ib[0], K[1] - ia[1] - ib[1]});
  }
  TorusPoint point(std::size_t f) const { return grid_point(index(f), d, L); }
};

void check_size(int L) {
  if (L < 2) throw GridError("L must be at least 2, got " + std::to_string(L));
}

std::size_t orbit_size(const std::array<std::size_t, 3>& s) {
  if (s[0] == s[1] && s[1] == s[2]) return 1;
  if (s[0] == s[1] || s[1] == s[2] || s[0] == s[2]) return 3;
  return 6;
}

// First nondegenerate gap of `sorted` at one end: the level spacing at that
// edge of the cluster.
double edge_spacing(const std::vector<double>& sorted, bool from_top) {
  const std::size_t n = sorted.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double a = from_top ? sorted[n - i] : sorted[i - 1];
    const double b = from_top ? sorted[n - i - 1] : sorted[i];
    const double g = std::abs(a - b);
    if (g > 1e-12 * std::max(1.0, std::abs(a))) return g;
  }
  return 0.0;
}

double median_spacing(const std::vector<double>& sorted) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double g = sorted[i] - sorted[i - 1];
    if (g > 1e-12 * std::max(1.0, std::abs(sorted[i]))) gaps.push_back(g);
  }
  if (gaps.empty()) return 0.0;
  const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return *mid;
}

OracleReport classify(std::vector<double> bosonic, double mu, const TorusPoint& K, int L,
                      const ClassifyOptions& options) {
  const Lattice lat(K.dim(), L);
  const Index Ki = grid_index(K, L);
  std::vector<double> free, channel;
  free.reserve(lat.size * lat.size);
  for (std::size_t a = 0; a < lat.size; ++a) {
    for (std::size_t b = 0; b < lat.size; ++b) free.push_back(three_body_symbol(K, lat.point(a), lat.point(b)));
  }
  if (mu != 0.0) {
    for (std::size_t a = 0; a < lat.size; ++a) {
      const Index ia = lat.index(a);
      const TorusPoint k = grid_point({Ki[0] - ia[0], Ki[1] - ia[1]}, lat.d, L);
      channel.push_back(discrete_bound_state(mu, k, L) + dispersion(lat.point(a)));
    }
  }
  std::sort(free.begin(), free.end());
  std::sort(channel.begin(), channel.end());
  // Each edge is fattened by the finer of the bosonic median spacing and the
  // level spacing of whichever set attains it.
  const bool channel_lo = !channel.empty() && channel.front() < free.front();
  const bool channel_hi = !channel.empty() && channel.back() > free.back();
  const double lo = channel_lo ? channel.front() : free.front();
  const double hi = channel_hi ? channel.back() : free.back();
  std::sort(bosonic.begin(), bosonic.end());
  OracleReport r;
  r.cluster_core = Interval(lo, hi);
  const double median = median_spacing(bosonic);
  r.spacing_below = std::min(median, edge_spacing(channel_lo ? channel : free, false));
  r.spacing_above = std::min(median, edge_spacing(channel_hi ? channel : free, true));
  r.cluster = Interval(lo - options.fattening * r.spacing_below, hi + options.fattening * r.spacing_above);
  for (double e : bosonic) {
    if (e < r.cluster.lo) r.isolated_below.push_back(e);
    if (e > r.cluster.hi) r.isolated_above.push_back(e);
  }
  r.bosonic_spectrum = std::move(bosonic);
  return r;
}

}  // namespace

Index grid_index(const TorusPoint& k, int L) {
  check_size(L);
  Index m{0, 0};
  for (int a = 0; a < k.dim(); ++a) {
    const double x = k[a] * L / kTwoPi;
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9 * L) {
      throw GridError("quasimomentum " + k.to_string() + " is not on the L = " +
                      std::to_string(L) + " grid");
    }
    m[static_cast<std::size_t>(a)] = mod(static_cast<int>(r), L);
  }
  return m;
}

TorusPoint grid_point(const Index& m, int d, int L) {
  if (d == 1) return TorusPoint(kTwoPi * mod(m[0], L) / L);
  return TorusPoint(kTwoPi * mod(m[0], L) / L, kTwoPi * mod(m[1], L) / L);
}

FiniteFiber finite_two_body(double mu, const TorusPoint& k, int L) {
  const Index ki = grid_index(k, L);
  const Lattice lat(k.dim(), L);
  FiniteFiber f;
  f.d = k.dim();
  f.L = L;
  f.mu = mu;
  f.quasimomentum = grid_point(ki, f.d, L);
  f.kind = FiberKind::two_body;
  f.matrix = linalg::Matrix(lat.size);
  const double c = mu / static_cast<double>(lat.size);
  for (std::size_t i = 0; i < lat.size; ++i) {
    for (std::size_t j = 0; j < lat.size; ++j) f.matrix(i, j) = c;
    f.matrix(i, i) += two_body_symbol(f.quasimomentum, lat.point(i));
  }
  return f;
}

double discrete_determinant(double mu, const TorusPoint& k, int L, double z) {
  const Index ki = grid_index(k, L);
  const Lattice lat(k.dim(), L);
  const TorusPoint kk = grid_point(ki, lat.d, L);
  double s = 0.0;
  for (std::size_t j = 0; j < lat.size; ++j) s += 1.0 / (two_body_symbol(kk, lat.point(j)) - z);
  return 1.0 + mu * s / static_cast<double>(lat.size);
}

double discrete_bound_state(double mu, const TorusPoint& k, int L) {
  if (mu == 0.0 || !std::isfinite(mu)) throw InvalidCoupling();
  const Index ki = grid_index(k, L);
  const Lattice lat(k.dim(), L);
  const TorusPoint kk = grid_point(ki, lat.d, L);
  std::vector<double> e(lat.size);
  for (std::size_t j = 0; j < lat.size; ++j) e[j] = two_body_symbol(kk, lat.point(j));
  const auto [emin, emax] = std::minmax_element(e.begin(), e.end());
  const double edge = mu < 0.0 ? *emin : *emax;
  const double dir = mu < 0.0 ? -1.0 : 1.0;
  const double inv_n = 1.0 / static_cast<double>(lat.size);
  // Delta(edge + dir t) rises from -infinity at t = 0 and is >= 0 at t = |mu|.
  auto delta = [&](double t) {
    const double z = edge + dir * t;
    double s = 0.0;
    for (double v : e) s += 1.0 / (v - z);
    return 1.0 + mu * s * inv_n;
  };
  double lo = 0.0, hi = std::abs(mu);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (delta(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return edge + dir * 0.5 * (lo + hi);
}

FiniteFiber finite_three_body(double mu, const TorusPoint& K, int L, std::size_t budget) {
  const Index Ki = grid_index(K, L);
  const Lattice lat(K.dim(), L);
  const std::size_t N = lat.size;
  if (N * N > budget) {
    throw SizeError("three-body fiber of size " + std::to_string(N * N) +
                    " exceeds the dense budget " + std::to_string(budget));
  }
  FiniteFiber f;
  f.d = K.dim();
  f.L = L;
  f.mu = mu;
  f.quasimomentum = grid_point(Ki, f.d, L);
  f.kind = FiberKind::three_body;
  f.matrix = linalg::Matrix(N * N);
  const double c = mu / static_cast<double>(N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const std::size_t row = i * N + j;
      const std::size_t r = lat.rest(Ki, i, j);
      f.matrix(row, row) += three_body_symbol(f.quasimomentum, lat.point(i), lat.point(j));
      for (std::size_t t = 0; t < N; ++t) {
        f.matrix(row, i * N + t) += c;
        f.matrix(row, t * N + j) += c;
        // Pairs (t, K - r - t) keep the third momentum r.
        f.matrix(row, t * N + lat.rest(Ki, r, t)) += c;
      }
    }
  }
  return f;
}

BosonicFiber bosonic_three_body(double mu, const TorusPoint& K, int L, std::size_t budget) {
  const Index Ki = grid_index(K, L);
  const Lattice lat(K.dim(), L);
  const std::size_t N = lat.size;
  BosonicFiber f;
  f.d = K.dim();
  f.L = L;
  f.mu = mu;
  f.quasimomentum = grid_point(Ki, f.d, L);

  std::unordered_map<std::size_t, std::size_t> lookup;
  auto key = [N](std::array<std::size_t, 3> s) {
    std::sort(s.begin(), s.end());
    return (s[0] * N + s[1]) * N + s[2];
  };
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t b = a; b < N; ++b) {
      const std::size_t c = lat.rest(Ki, a, b);
      if (c < b) continue;
      lookup.emplace(key({a, b, c}), f.orbits.size());
      f.orbits.push_back({a, b, c});
    }
  }
  const std::size_t M = f.orbits.size();
  if (M > budget) {
    throw SizeError("bosonic three-body fiber of size " + std::to_string(M) +
                    " exceeds the dense budget " + std::to_string(budget));
  }
  std::vector<double> sqrt_size(M);
  for (std::size_t o = 0; o < M; ++o) sqrt_size[o] = std::sqrt(static_cast<double>(orbit_size(f.orbits[o])));

  f.matrix = linalg::Matrix(M);
  const double c = mu / static_cast<double>(N);
  for (std::size_t o = 0; o < M; ++o) {
    const auto& s = f.orbits[o];
    f.matrix(o, o) += three_body_symbol(f.quasimomentum, lat.point(s[0]), lat.point(s[1]));
    // <O|H|O'> = sqrt(|O| / |O'|) sum over ordered s' in O' of H[s0, s'].
    for (std::size_t spectator : s) {
      for (std::size_t t = 0; t < N; ++t) {
        const std::size_t u = lat.rest(Ki, spectator, t);
        const std::size_t o2 = lookup.at(key({spectator, t, u}));
        f.matrix(o, o2) += c * sqrt_size[o] / sqrt_size[o2];
      }
    }
  }
  f.matrix.symmetrize();
  return f;
}

std::vector<double> symmetrize_vector(const FiniteFiber& fiber, std::span<const double> v) {
  const Lattice lat(fiber.d, fiber.L);
  const Index Ki = grid_index(fiber.quasimomentum, fiber.L);
  const std::size_t N = lat.size;
  std::vector<double> out(N * N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const std::size_t r = lat.rest(Ki, i, j);
      out[i * N + j] = (v[i * N + j] + v[j * N + i] + v[i * N + r] + v[r * N + i] +
                        v[j * N + r] + v[r * N + j]) / 6.0;
    }
  }
  return out;
}

OracleReport classify_spectrum(const FiniteFiber& fiber, const ClassifyOptions& options) {
  if (fiber.kind != FiberKind::three_body) throw DomainError("classify_spectrum needs a three-body fiber");
  const auto eig = linalg::eigh(fiber.matrix, true);
  const std::size_t n = eig.n;
  std::vector<double> bosonic;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && eig.values[end] - eig.values[end - 1] <=
                          1e-9 * std::max(1.0, std::abs(eig.values[end]))) {
      ++end;
    }
    // Projected Gram matrix of the multiplet; bosonic directions have weight 1.
    const std::size_t m = end - start;
    std::vector<std::vector<double>> pv;
    for (std::size_t a = 0; a < m; ++a) pv.push_back(symmetrize_vector(fiber, eig.vector(start + a)));
    linalg::Matrix g(m);
    for (std::size_t a = 0; a < m; ++a) {
      const auto va = eig.vector(start + a);
      for (std::size_t b = 0; b < m; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += va[i] * pv[b][i];
        g(a, b) = s;
      }
    }
    g.symmetrize();
    double mean = 0.0;
    for (std::size_t a = start; a < end; ++a) mean += eig.values[a];
    mean /= static_cast<double>(m);
    for (double w : linalg::eigvalsh(g)) {
      if (w > 1.0 - options.symmetry_tol) bosonic.push_back(mean);
    }
    start = end;
  }
  return classify(std::move(bosonic), fiber.mu, fiber.quasimomentum, fiber.L, options);
}

OracleReport classify_spectrum(const BosonicFiber& fiber, const ClassifyOptions& options) {
  return classify(linalg::eigvalsh(fiber.matrix), fiber.mu, fiber.quasimomentum, fiber.L, options);
}

Extrapolation extrapolate(std::span<const double> values, std::span<const int> L) {
  if (values.size() < 3 || values.size() != L.size()) {
    throw DomainError("extrapolation needs at least three values with matching sizes");
  }
  const std::size_t k = values.size();
  const double ratio = static_cast<double>(L[k - 1]) / L[k - 2];
  for (std::size_t i = 1; i < k; ++i) {
    if (std::abs(static_cast<double>(L[i]) / L[i - 1] - ratio) > 1e-12 * ratio || ratio <= 1.0) {
      throw DomainError("extrapolation sizes must form an increasing geometric progression");
    }
  }
  const double v0 = values[k - 3], v1 = values[k - 2], v2 = values[k - 1];
  const double d1 = v1 - v0, d2 = v2 - v1;
  Extrapolation out;
  if (d2 == 0.0) {
    out.energy = v2;
    out.error = 0.0;
    return out;
  }
  if (d1 == 0.0 || (d1 > 0.0) != (d2 > 0.0) || std::abs(d2) >= std::abs(d1)) {
    out.energy = v2;
    out.error = std::abs(d1) + std::abs(d2);
    out.warning = "sequence is not monotonically converging; no extrapolation";
    return out;
  }
  const double r = d1 / d2;
  out.energy = v2 + d2 / (r - 1.0);
  out.error = std::abs(out.energy - v2);
  out.exponent = std::log(r) / std::log(ratio);
  out.extrapolated = true;
  return out;
}

namespace {

Extrapolation short_sequence(const std::vector<double>& values) {
  Extrapolation out;
  out.energy = values.back();
  out.error = values.size() > 1 ? std::abs(values.back() - values[values.size() - 2]) : 0.0;
  out.warning = "fewer than three sizes; last value reported";
  return out;
}

}  // namespace

OracleEnergy three_body_energy(double mu, const TorusPoint& K, std::span<const int> L,
                               const ClassifyOptions& options) {
  if (mu == 0.0 || !std::isfinite(mu)) throw InvalidCoupling();
  if (L.empty()) throw DomainError("empty L sequence");
  OracleEnergy out;
  for (int l : L) {
    const auto report = classify_spectrum(bosonic_three_body(mu, K, l), options);
    const auto& side = mu < 0.0 ? report.isolated_below : report.isolated_above;
    if (side.empty()) {
      throw ConvergenceError("no isolated bosonic eigenvalue on the bound side at L = " +
                             std::to_string(l));
    }
    out.L.push_back(l);
    out.energies.push_back(mu < 0.0 ? side.front() : side.back());
    out.reports.push_back(report);
  }
  out.extrapolation = L.size() >= 3 ? extrapolate(out.energies, out.L) : short_sequence(out.energies);
  return out;
}

OracleEnergy two_body_energy(double mu, const TorusPoint& k, std::span<const int> L) {
  if (L.empty()) throw DomainError("empty L sequence");
  OracleEnergy out;
  for (int l : L) {
    out.L.push_back(l);
    out.energies.push_back(discrete_bound_state(mu, k, l));
  }
  out.extrapolation = L.size() >= 3 ? extrapolate(out.energies, out.L) : short_sequence(out.energies);
  return out;
}

}  // namespace latbound::oracle
