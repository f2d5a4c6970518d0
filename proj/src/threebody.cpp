#include "latbound/threebody.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "latbound/errors.hpp"
#include "latbound/kernels.hpp"
#include "latbound/parallel.hpp"
#include "latbound/twobody.hpp"

namespace latbound::threebody {

namespace {

double pair_energy(double mu, const TorusPoint& k) {
  twobody::SolverOptions opts;
  opts.sample_n = -1;
  return twobody::bound_state_energy(mu, k, opts).energy;
}

std::string describe(double mu, const TorusPoint& K) {
  return "mu = " + to_text(mu) + ", K = " + K.to_string();
}

TorusPoint point_from(std::span<const double> x) { return TorusPoint::from_coords(x); }

}  // namespace

ChannelBranch channel_branch(double mu, const TorusPoint& K, int n_p) {
  if (mu == 0.0 || !std::isfinite(mu)) throw InvalidCoupling();
  const int d = K.dim();
  if (n_p <= 0) n_p = d == 1 ? 256 : 64;
  ChannelBranch out;
  out.grid = UniformGrid(d, n_p);
  out.values.resize(out.grid.size());
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    const TorusPoint p = out.grid.node(i);
    out.values[i] = pair_energy(mu, K - p) + dispersion(p);
  }
  auto z = [&](std::span<const double> x) {
    const TorusPoint p = point_from(x);
    return pair_energy(mu, K - p) + dispersion(p);
  };
  ExtremumOptions opts;
  opts.scan_n = n_p;
  const auto lo = extremum_on_torus(z, d, Extremum::min, opts);
  const auto hi = extremum_on_torus(z, d, Extremum::max, opts);
  const auto [gmin, gmax] = std::minmax_element(out.values.begin(), out.values.end());
  out.range = Interval(std::min(lo.value, *gmin), std::max(hi.value, *gmax));
  out.argmin = point_from(lo.argument);
  out.argmax = point_from(hi.argument);
  return out;
}

double SpectrumDecomposition::distance(double z) const {
  return std::min(two_particle_branch.distance(z), three_particle_band.distance(z));
}

SpectrumDecomposition essential_spectrum(double mu, const TorusPoint& K, int n_p) {
  const ChannelBranch branch = channel_branch(mu, K, n_p);
  SpectrumDecomposition s;
  s.two_particle_branch = branch.range;
  s.three_particle_band = three_particle_band(K);
  s.tau_bottom = std::min(s.two_particle_branch.lo, s.three_particle_band.lo);
  s.tau_top = std::max(s.two_particle_branch.hi, s.three_particle_band.hi);
  s.threshold_momentum = mu < 0.0 ? branch.argmin : branch.argmax;
  if (mu < 0.0 && !(s.tau_bottom < s.three_particle_band.lo)) {
    throw ConvergenceError("channel branch does not reach below the free band for " +
                           describe(mu, K));
  }
  if (mu > 0.0 && !(s.tau_top > s.three_particle_band.hi)) {
    throw ConvergenceError("channel branch does not reach above the free band for " +
                           describe(mu, K));
  }
  return s;
}

double channel_determinant(double mu, const TorusPoint& K, const TorusPoint& p, double z) {
  return twobody::determinant(mu, K - p, z - dispersion(p));
}

double channel_determinant_quadrature(double mu, const TorusPoint& K, const TorusPoint& p,
                                      double z, int n) {
  const UniformGrid grid(K.dim(), n);
  std::vector<TorusPoint> nodes(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) nodes[j] = grid.node(j);
  const kernels::MomentumTables tables(nodes);
  std::vector<double> sym(grid.size());
  kernels::active().three_body_symbol_row(kernels::make_symbol_row(K, p), tables.columns(), sym);
  const auto [lo, hi] = std::minmax_element(sym.begin(), sym.end());
  if (z >= *lo && z <= *hi) throw DomainError("z lies inside the range of E(K; p, .)");
  return 1.0 + mu * kernels::active().resolvent_moments(sym, z, grid.weight()).first;
}

int default_nodes(int d) { return d == 1 ? 512 : 48; }

BSOperator bs_matrix(double mu, const TorusPoint& K, double z, int n) {
  return bs_matrix(mu, K, z, n, essential_spectrum(mu, K));
}

BSOperator bs_matrix(double mu, const TorusPoint& K, double z, int n,
                     const SpectrumDecomposition& spectrum) {
  if (mu == 0.0 || !std::isfinite(mu)) throw InvalidCoupling();
  if (!(z < spectrum.tau_bottom || z > spectrum.tau_top)) {
    throw DomainError("z = " + to_text(z) + " lies inside the essential spectrum [" +
                      to_text(spectrum.tau_bottom) + ", " +
                      to_text(spectrum.tau_top) + "]");
  }
  BSOperator op;
  op.mu = mu;
  op.K = K;
  op.z = z;
  op.grid = UniformGrid(K.dim(), n);
  const std::size_t size = op.grid.size();
  // -2 mu / (E - z) has the sign of -mu below the band and of mu above it.
  const bool below = z < spectrum.three_particle_band.lo;
  op.sign = (below ? mu < 0.0 : mu > 0.0) ? 1 : -1;

  std::vector<TorusPoint> nodes(size);
  op.inv_sqrt_delta.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    nodes[i] = op.grid.node(i);
    const double delta = channel_determinant(mu, K, nodes[i], z);
    if (!(delta > 0.0)) {
      throw InvalidEnergy("channel determinant " + to_text(delta) + " at p = " +
                          nodes[i].to_string() + " is not positive for z = " + to_text(z));
    }
    op.inv_sqrt_delta[i] = 1.0 / std::sqrt(delta);
  }
  const kernels::MomentumTables tables(nodes);
  const auto cols = tables.columns();
  const auto& kt = kernels::active();
  const double prefactor = op.grid.weight() * 2.0 * std::abs(mu);
  op.matrix = linalg::Matrix(size);
  for (std::size_t i = 0; i < size; ++i) {
    kt.nystrom_row(kernels::make_symbol_row(K, nodes[i]), cols, op.inv_sqrt_delta,
                   prefactor * op.inv_sqrt_delta[i], z, op.matrix.row(i));
  }
  if (op.sign < 0) {
    for (double& v : op.matrix.data()) v = -v;
  }
  op.matrix.symmetrize();
  return op;
}

linalg::Eigenpair bs_lambda_max(const BSOperator& op, std::span<const double> start) {
  linalg::Eigenpair e = op.sign > 0 ? linalg::largest_eigenpair(op.matrix, start, 256)
                                    : linalg::largest_eigenpair_dense(op.matrix);
  double sum = 0.0;
  for (double v : e.vector) sum += v;
  if (sum < 0.0) {
    for (double& v : e.vector) v = -v;
  }
  return e;
}

linalg::SignedLogDet fredholm_det(const BSOperator& op) {
  linalg::Matrix a(op.matrix.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) a(i, j) = -op.matrix(i, j);
    a(i, i) += 1.0;
  }
  return linalg::log_determinant(a);
}

double fredholm_det(double mu, const TorusPoint& K, double z, int n) {
  return fredholm_det(bs_matrix(mu, K, z, n)).value();
}

Reconstruction reconstruct_eigenfunction(const BSOperator& op, std::span<const double> bs_vector,
                                         double lambda) {
  const UniformGrid& g = op.grid;
  const std::size_t N = g.size();
  const int n = g.per_axis();
  const int d = g.dim();
  const double mu = op.mu;
  const double z = op.z;
  const auto& kt = kernels::active();

  std::vector<TorusPoint> nodes(N);
  for (std::size_t i = 0; i < N; ++i) nodes[i] = g.node(i);
  const kernels::MomentumTables tables(nodes);
  const auto cols = tables.columns();

  Reconstruction out;
  out.grid = g;
  std::vector<double> phi_grid(N);
  for (std::size_t i = 0; i < N; ++i) phi_grid[i] = op.inv_sqrt_delta[i] * bs_vector[i];

  const double prefactor = op.sign * g.weight() * 2.0 * std::abs(mu) / lambda;
  std::vector<double> buf(N);
  auto phi_at = [&](const TorusPoint& x) {
    kt.nystrom_row(kernels::make_symbol_row(op.K, x), cols, phi_grid, 1.0, z, buf);
    double s = 0.0;
    for (double v : buf) s += v;
    return prefactor * s / channel_determinant(mu, op.K, x, z);
  };

  out.phi.resize(N);
  for (std::size_t i = 0; i < N; ++i) out.phi[i] = phi_at(nodes[i]);
  // p_i + q_j = 2 pi (a_i + a_j) / n per axis, so K - p - q takes n^d values.
  std::vector<double> phi_rest(N);
  for (std::size_t m = 0; m < N; ++m) {
    const auto idx = g.axis_indices(m);
    const TorusPoint shift = d == 1 ? TorusPoint(kTwoPi * idx[0] / n)
                                    : TorusPoint(kTwoPi * idx[0] / n, kTwoPi * idx[1] / n);
    phi_rest[m] = phi_at(op.K - shift);
  }
  auto sum_index = [&](std::size_t i, std::size_t j) {
    const auto a = g.axis_indices(i);
    const auto b = g.axis_indices(j);
    return g.flat_index({(a[0] + b[0]) % n, d == 2 ? (a[1] + b[1]) % n : 0});
  };

  out.f.assign(N * N, 0.0);
  std::vector<double> sym(N);
  for (std::size_t i = 0; i < N; ++i) {
    kt.three_body_symbol_row(kernels::make_symbol_row(op.K, nodes[i]), cols, sym);
    for (std::size_t j = 0; j < N; ++j) {
      out.f[i * N + j] = -mu * (out.phi[i] + out.phi[j] + phi_rest[sum_index(i, j)]) / (sym[j] - z);
    }
  }
  double norm2 = 0.0;
  for (double v : out.f) norm2 += v * v;
  const double scale = 1.0 / std::sqrt(norm2 * g.weight() * g.weight());
  for (double& v : out.f) v *= scale;

  double fmax = 0.0, fmin_v = std::numeric_limits<double>::infinity(),
         fmax_v = -std::numeric_limits<double>::infinity();
  for (double v : out.f) {
    fmax = std::max(fmax, std::abs(v));
    fmin_v = std::min(fmin_v, v);
    fmax_v = std::max(fmax_v, v);
  }
  out.single_signed = (fmin_v > 0.0 && fmax_v > 0.0) || (fmin_v < 0.0 && fmax_v < 0.0);

  // Exchange p <-> q on the grid, and (p, q) -> (p, K - p - q) through the
  // formula at the mapped point.
  double sym_res = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      sym_res = std::max(sym_res, std::abs(out.f[i * N + j] - out.f[j * N + i]));
    }
  }
  const std::size_t stride = std::max<std::size_t>(1, N * N / 4096);
  for (std::size_t flat = 0; flat < N * N; flat += stride) {
    const std::size_t i = flat / N, j = flat % N;
    const TorusPoint r = op.K - nodes[i] - nodes[j];
    const double e = three_body_symbol(op.K, nodes[i], r);
    const double mapped =
        -mu * (out.phi[i] + phi_at(r) + phi_at(op.K - nodes[i] - r)) / (e - z) * scale;
    sym_res = std::max(sym_res, std::abs(mapped - out.f[flat]));
  }
  out.symmetry_residual = sym_res / fmax;

  // Residual of (E - z) f + mu V f with the three pair sums on the grid.
  std::vector<double> rows(N, 0.0), colsum(N, 0.0), pair(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const double v = out.f[i * N + j];
      rows[i] += v;
      colsum[j] += v;
      pair[sum_index(i, j)] += v;
    }
  }
  double res2 = 0.0, f2 = 0.0;
  const double w = g.weight();
  for (std::size_t i = 0; i < N; ++i) {
    kt.three_body_symbol_row(kernels::make_symbol_row(op.K, nodes[i]), cols, sym);
    for (std::size_t j = 0; j < N; ++j) {
      const double v = out.f[i * N + j];
      const double r = (sym[j] - z) * v + mu * w * (rows[i] + colsum[j] + pair[sum_index(i, j)]);
      res2 += r * r;
      f2 += v * v;
    }
  }
  out.schrodinger_residual = std::sqrt(res2 / f2);
  return out;
}

namespace {

struct Bracketing {
  double mu;
  TorusPoint K;
  int n;
  const SpectrumDecomposition& spectrum;
  double edge;
  double direction;
  std::vector<double> warm;

  double z_at(double x) const { return edge + direction * x; }
  BSOperator op(double x) const { return bs_matrix(mu, K, z_at(x), n, spectrum); }
  double lambda(double x) {
    const auto e = bs_lambda_max(op(x), warm);
    warm = e.vector;
    return e.value;
  }
};

double near_offset(double edge) { return 1e-8 * std::max(1.0, std::abs(edge)); }

}  // namespace

ThreeBodySolution bound_state_energy(double mu, const TorusPoint& K, const SolverOptions& options) {
  if (mu == 0.0 || !std::isfinite(mu)) throw InvalidCoupling();
  const int n = options.n > 0 ? options.n : default_nodes(K.dim());
  ThreeBodySolution sol;
  sol.mu = mu;
  sol.K = K;
  sol.n = n;
  sol.spectrum = essential_spectrum(mu, K, options.branch_n);
  const double edge = mu < 0.0 ? sol.spectrum.tau_bottom : sol.spectrum.tau_top;
  Bracketing br{mu, K, n, sol.spectrum, edge, mu < 0.0 ? -1.0 : 1.0, {}};

  const double near = near_offset(edge);
  const double lambda_near = br.lambda(near);
  ++sol.iterations;
  if (lambda_near < 1.0) {
    throw UnresolvedBoundState("lambda_max = " + to_text(lambda_near) +
                               " < 1 at distance " + to_text(near) +
                               " from the essential edge with n = " + std::to_string(n) +
                               " for " + describe(mu, K));
  }
  double far = 1.0;
  while (br.lambda(far) >= 1.0) {
    ++sol.iterations;
    far *= 2.0;
    if (far > 1e6) throw BracketError("lambda_max stays above 1 far from the edge for " + describe(mu, K));
  }
  ++sol.iterations;

  double lo = near, hi = far;
  while (hi - lo > options.tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (br.lambda(mid) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++sol.iterations;
  }
  const double x = 0.5 * (lo + hi);
  sol.energy = br.z_at(x);
  const BSOperator op = br.op(x);
  auto top = bs_lambda_max(op, br.warm);
  sol.lambda = top.value;
  sol.residual = std::abs(top.value - 1.0);
  sol.bs_vector = std::move(top.vector);

  if (options.check_monotone) {
    // Geometric samples from the far end to the root; lambda must rise.
    for (int i = 0; i < 10; ++i) {
      const double xi = far * std::pow(x / far, i / 9.0);
      sol.monotone_z.push_back(br.z_at(xi));
      sol.monotone_lambda.push_back(br.lambda(xi));
      if (i > 0 && !(sol.monotone_lambda[i] > sol.monotone_lambda[i - 1])) sol.monotone = false;
    }
  }
  if (options.reconstruct) sol.eigenfunction = reconstruct_eigenfunction(op, sol.bs_vector, sol.lambda);
  return sol;
}

FredholmRoot fredholm_root(double mu, const TorusPoint& K, int n, double tol) {
  if (mu == 0.0 || !std::isfinite(mu)) throw InvalidCoupling();
  const SpectrumDecomposition spectrum = essential_spectrum(mu, K);
  const double edge = mu < 0.0 ? spectrum.tau_bottom : spectrum.tau_top;
  const double direction = mu < 0.0 ? -1.0 : 1.0;
  FredholmRoot out;
  auto det_sign = [&](double x) {
    ++out.iterations;
    return fredholm_det(bs_matrix(mu, K, edge + direction * x, n, spectrum)).sign;
  };
  // D -> 1 far from the edge; walk inward until the first sign change.
  double far = 1.0;
  while (det_sign(far) <= 0) {
    far *= 2.0;
    if (far > 1e6) throw BracketError("Fredholm determinant not positive far from the edge");
  }
  const double near = near_offset(edge);
  const int steps = 64;
  const double ratio = std::pow(near / far, 1.0 / steps);
  double outer = far, inner = far;
  bool found = false;
  for (int i = 1; i <= steps; ++i) {
    inner = far * std::pow(ratio, i);
    if (det_sign(inner) <= 0) {
      found = true;
      break;
    }
    outer = inner;
  }
  if (!found) throw UnresolvedBoundState("no sign change of the Fredholm determinant for " + describe(mu, K));
  double lo = inner, hi = outer;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (det_sign(mid) <= 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.energy = edge + direction * 0.5 * (lo + hi);
  return out;
}

BandReport band_scan(double mu, int d, int n_K, int n, int jobs) {
  if (mu == 0.0 || !std::isfinite(mu)) throw InvalidCoupling();
  const UniformGrid grid(d, n_K);
  BandReport report;
  report.mu = mu;
  report.d = d;
  report.n = n_K;
  report.rows.resize(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    BandRow& row = report.rows[i];
    row.quasimomentum = grid.node(i);
    try {
      SolverOptions opts;
      opts.n = n;
      opts.reconstruct = false;
      opts.check_monotone = false;
      const auto sol = bound_state_energy(mu, row.quasimomentum, opts);
      row.energy = sol.energy;
      row.tau_bottom = sol.spectrum.tau_bottom;
      row.tau_top = sol.spectrum.tau_top;
      row.free_band = sol.spectrum.three_particle_band;
      row.gap = sol.spectrum.distance(sol.energy);
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.status = e.what();
    }
  });
  summarize(report);
  return report;
}

std::vector<DivergenceSample> edge_divergence_diagnostic(double mu, const TorusPoint& K,
                                                         std::span<const double> z_sequence) {
  if (mu == 0.0 || !std::isfinite(mu)) throw InvalidCoupling();
  const SpectrumDecomposition s = essential_spectrum(mu, K);
  const TorusPoint p0 = s.threshold_momentum;
  const int d = K.dim();
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  // Delta near threshold carries relative rounding of about 1e-10, so tighter
  // tolerances only drive the subdivision to its depth limit.
  const double tol = d == 1 ? 1e-8 : 1e-6;
  const unsigned depth = d == 1 ? 18 : 10;

  // Integrate a periodic function over one period, split at the peak.
  auto periodic = [&](const auto& f, double center) {
    return Quad::integrate(f, center - kPi, center, depth, tol) +
           Quad::integrate(f, center, center + kPi, depth, tol);
  };

  std::vector<DivergenceSample> out;
  for (double z : z_sequence) {
    const bool bound_side = mu < 0.0 ? z < s.tau_bottom : z > s.tau_top;
    if (!bound_side) {
      throw DomainError("z = " + to_text(z) + " is not on the bound-state side of the edge");
    }
    double value;
    if (d == 1) {
      value = periodic([&](double x) { return 1.0 / channel_determinant(mu, K, TorusPoint(x), z); },
                       p0[0]) / kTwoPi;
    } else {
      auto outer = [&](double x) {
        return periodic(
            [&](double y) { return 1.0 / channel_determinant(mu, K, TorusPoint(x, y), z); }, p0[1]);
      };
      value = periodic(outer, p0[0]) / (kTwoPi * kTwoPi);
    }
    out.push_back({z, value});
  }
  return out;
}

double log_log_slope(std::span<const DivergenceSample> samples, double tau) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const double x = std::log(std::abs(tau - s.z));
    const double y = std::log(s.value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace latbound::threebody
