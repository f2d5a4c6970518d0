#include "latbound/twobody.hpp"

#include <algorithm>
#include <boost/math/special_functions/ellint_2.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "latbound/errors.hpp"
#include "latbound/kernels.hpp"
#include "latbound/parallel.hpp"

namespace latbound {

void summarize(BandReport& report) {
  report.all_ok = true;
  bool any = false;
  double lo = 0.0, hi = 0.0, gap = std::numeric_limits<double>::infinity();
  for (const auto& row : report.rows) {
    if (!row.ok) {
      report.all_ok = false;
      continue;
    }
    if (!any) {
      lo = hi = row.energy;
      any = true;
    }
    lo = std::min(lo, row.energy);
    hi = std::max(hi, row.energy);
    gap = std::min(gap, row.gap);
  }
  report.band = any ? Interval(lo, hi) : Interval();
  report.min_gap = any ? gap : 0.0;
  report.isolated = any && report.all_ok && gap > 0.0;
}

}  // namespace latbound

namespace latbound::twobody {

BandEdges band_edges(const TorusPoint& k) {
  BandEdges e;
  e.dim = k.dim();
  for (int a = 0; a < k.dim(); ++a) {
    // k_a in (-pi, pi] keeps the half-angle cosine nonnegative.
    const double c = std::max(0.0, std::cos(0.5 * k[a]));
    e.half_cos[static_cast<std::size_t>(a)] = c;
    e.lo += 4.0 * (1.0 - c);
    e.hi += 4.0 * (1.0 + c);
  }
  return e;
}

Interval essential_interval_scan(const TorusPoint& k) {
  auto sym = [&k](const TorusPoint& p) { return two_body_symbol(k, p); };
  return {extremum_on_torus(sym, k.dim(), Extremum::min).value,
          extremum_on_torus(sym, k.dim(), Extremum::max).value};
}

namespace {

double agm(double a, double b) {
  for (int i = 0; i < 64; ++i) {
    const double an = 0.5 * (a + b);
    const double bn = std::sqrt(a * b);
    a = an;
    b = bn;
    if (std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * a) break;
  }
  return 0.5 * (a + b);
}

void require_gap(double gap) {
  if (!(gap > 0.0) || !std::isfinite(gap)) {
    throw DomainError("energy lies inside the two-body essential spectrum");
  }
}

}  // namespace

ReducedGreen reduced_green(std::span<const double> half_cos, double gap) {
  require_gap(gap);
  const double b1 = 4.0 * half_cos[0];
  const double b2 = half_cos.size() > 1 ? 4.0 * half_cos[1] : 0.0;
  const double t = gap;
  const double alpha = t + b1 + b2;
  // alpha^2 - (b1 - b2)^2 in factored form, exact as t -> 0.
  const double d = (t + 2.0 * b1) * (t + 2.0 * b2);
  const double sqrt_d = std::sqrt(d);
  const double s = t + 2.0 * (b1 + b2);
  const double kp = std::sqrt(t * s / d);
  ReducedGreen out;
  out.value = 1.0 / (sqrt_d * agm(1.0, kp));
  const double k = std::min(1.0, std::sqrt(4.0 * b1 * b2 / d));
  const double e = boost::math::ellint_2(k);
  out.gap_log_derivative = -(2.0 / kPi) * alpha * e / (sqrt_d * s);
  return out;
}

namespace {

double semi_analytic_sum(double t, double b1, double b2, int n) {
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double theta = -kPi + kTwoPi * j / n;
    const double sh = std::sin(0.5 * theta);
    const double a = t + 2.0 * b1 * sh * sh;
    sum += 1.0 / std::sqrt(a * (a + 2.0 * b2));
  }
  return sum / n;
}

}  // namespace

double reduced_green_semi_analytic(std::span<const double> half_cos, double gap, int n) {
  require_gap(gap);
  const double b1 = 4.0 * half_cos[0];
  const double b2 = half_cos.size() > 1 ? 4.0 * half_cos[1] : 0.0;
  if (half_cos.size() == 1) return 1.0 / std::sqrt(gap * (gap + 2.0 * b1));
  // Axis 1 in closed form, axis 0 by the rectangle rule.
  if (n > 0) return semi_analytic_sum(gap, b1, b2, n);
  int m = 64;
  double prev = semi_analytic_sum(gap, b1, b2, m);
  while (m < (1 << 22)) {
    m *= 2;
    const double cur = semi_analytic_sum(gap, b1, b2, m);
    if (std::abs(cur - prev) <= 1e-13 * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

GreenValue greens_at_gap(const TorusPoint& k, double gap, Side side) {
  const BandEdges e = band_edges(k);
  const auto rg = reduced_green(std::span<const double>(e.half_cos.data(), static_cast<std::size_t>(e.dim)), gap);
  const double dz = -rg.gap_log_derivative / gap;
  if (side == Side::below) return {rg.value, dz};
  return {-rg.value, dz};
}

namespace {

struct GapPosition {
  double gap;
  Side side;
};

GapPosition locate(const BandEdges& e, double z) {
  if (z < e.lo) return {e.lo - z, Side::below};
  if (z > e.hi) return {z - e.hi, Side::above};
  throw DomainError("z = " + to_text(z) + " lies inside the two-body essential spectrum [" +
                    to_text(e.lo) + ", " + to_text(e.hi) + "]");
}

}  // namespace

GreenValue greens_integral_with_derivative(const TorusPoint& k, double z) {
  const auto pos = locate(band_edges(k), z);
  return greens_at_gap(k, pos.gap, pos.side);
}

double greens_integral(const TorusPoint& k, double z) {
  return greens_integral_with_derivative(k, z).value;
}

double greens_integral_semi_analytic(const TorusPoint& k, double z, int n) {
  const BandEdges e = band_edges(k);
  const auto pos = locate(e, z);
  const double g = reduced_green_semi_analytic(
      std::span<const double>(e.half_cos.data(), static_cast<std::size_t>(e.dim)), pos.gap, n);
  return pos.side == Side::below ? g : -g;
}

double greens_integral_quadrature(const TorusPoint& k, double z, int n) {
  locate(band_edges(k), z);
  const UniformGrid grid(k.dim(), n);
  std::vector<double> sym(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) sym[j] = two_body_symbol(k, grid.node(j));
  return kernels::active().resolvent_moments(sym, z, grid.weight()).first;
}

double determinant(double mu, const TorusPoint& k, double z) {
  return 1.0 + mu * greens_integral(k, z);
}

double determinant_at_gap(double mu, const TorusPoint& k, double gap, Side side) {
  return 1.0 + mu * greens_at_gap(k, gap, side).value;
}

namespace {

// On the bound-state side Delta = 1 - |mu| g(t), increasing in the gap t.
struct GapFunction {
  double abs_mu;
  std::array<double, kMaxDim> half_cos;
  std::size_t dim;

  ReducedGreen green(double t) const {
    return reduced_green(std::span<const double>(half_cos.data(), dim), t);
  }
  double delta(double t) const { return 1.0 - abs_mu * green(t).value; }
};

}  // namespace

TwoBodySolution bound_state_energy(double mu, const TorusPoint& k, const SolverOptions& options) {
  if (mu == 0.0 || !std::isfinite(mu)) throw InvalidCoupling();
  const int d = k.dim();
  const double tol = options.tol > 0.0 ? options.tol : (d == 1 ? 1e-12 : 1e-10);
  const BandEdges edges = band_edges(k);

  TwoBodySolution sol;
  sol.mu = mu;
  sol.k = k;
  sol.side = mu < 0.0 ? Side::below : Side::above;
  sol.ess = edges.interval();

  const GapFunction fn{std::abs(mu), edges.half_cos, static_cast<std::size_t>(d)};

  // Far end: the integrand is at most 1/t, so Delta >= 1/2 at t = 2|mu|.
  double far = 2.0 * std::abs(mu);
  for (int i = 0; i < 3 && fn.delta(far) <= 0.0; ++i) far *= 2.0;
  if (fn.delta(far) <= 0.0) throw BracketError("Delta not positive far from the band edge");

  // Near end: Delta -> -infinity at the edge in d = 1, 2.
  const double edge = sol.side == Side::below ? edges.lo : edges.hi;
  double near = 1e-13 * std::max(1.0, std::abs(edge));
  int shrink = 0;
  while (fn.delta(near) >= 0.0) {
    if (shrink < 40) {
      near *= 0.5;
    } else if (near > 1e-290) {
      // d = 2 weak coupling: the gap is exponentially small in 1/|mu|.
      near *= 1e-4;
    } else {
      throw BracketError("no sign change of Delta next to the band edge for mu = " +
                         to_text(mu) + ", k = " + k.to_string());
    }
    ++shrink;
  }

  double lo = near, hi = far;
  int iters = 0;
  while (iters < 2000) {
    const double width = hi - lo;
    if (width <= tol && width <= 1e-12 * hi) break;
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fn.delta(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++iters;
  }

  // Newton polish in u = log t; dDelta/du = -|mu| t g'(t).
  double t = 0.5 * (lo + hi);
  double best_res = std::abs(fn.delta(t));
  for (int i = 0; i < 3; ++i) {
    const auto g = fn.green(t);
    const double delta = 1.0 - fn.abs_mu * g.value;
    const double slope = -fn.abs_mu * g.gap_log_derivative;
    if (slope <= 0.0) break;
    const double t_new = t * std::exp(-delta / slope);
    ++iters;
    if (!(t_new >= lo && t_new <= hi)) break;
    const double res = std::abs(fn.delta(t_new));
    if (res >= best_res) break;
    t = t_new;
    best_res = res;
  }

  sol.edge_gap = t;
  sol.energy = sol.side == Side::below ? edges.lo - t : edges.hi + t;
  sol.iterations = iters;
  sol.residual = best_res;

  if (options.sample_n >= 0) {
    const int n = options.sample_n > 0 ? options.sample_n : (d == 1 ? 256 : 64);
    sol.sample_grid = UniformGrid(d, n);
    sol.eigenfunction_samples = eigenfunction(sol, sol.sample_grid);
  }
  return sol;
}

double eigenfunction_unnormalized(const TwoBodySolution& sol, const TorusPoint& p) {
  const BandEdges e = band_edges(sol.k);
  // E_k(p) - edge in half-angle form; sin^2 / cos^2 avoid cancellation.
  double offset = 0.0;
  for (int a = 0; a < e.dim; ++a) {
    const double half = 0.5 * (p[a] - 0.5 * sol.k[a]);
    const double c = e.half_cos[static_cast<std::size_t>(a)];
    if (sol.side == Side::below) {
      offset += 8.0 * c * std::sin(half) * std::sin(half);
    } else {
      offset += 8.0 * c * std::cos(half) * std::cos(half);
    }
  }
  // E_k(p) - e = offset + gap below the band, -(offset + gap) above it.
  const double denom = offset + sol.edge_gap;
  return sol.side == Side::below ? sol.mu / denom : -sol.mu / denom;
}

std::vector<double> eigenfunction(const TwoBodySolution& sol, const UniformGrid& grid) {
  std::vector<double> f(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    f[j] = eigenfunction_unnormalized(sol, grid.node(j));
  }
  double norm2 = 0.0;
  for (double v : f) norm2 += v * v;
  double scale = 1.0 / std::sqrt(norm2 * grid.weight());
  if (f[grid.nearest(TorusPoint::zero(grid.dim()))] < 0.0) scale = -scale;
  for (double& v : f) v *= scale;
  return f;
}

BandReport band_scan(double mu, int d, int n_k, int jobs) {
  if (mu == 0.0) throw InvalidCoupling();
  const UniformGrid grid(d, n_k);
  BandReport report;
  report.mu = mu;
  report.d = d;
  report.n = n_k;
  report.rows.resize(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    BandRow& row = report.rows[i];
    row.quasimomentum = grid.node(i);
    try {
      SolverOptions opts;
      opts.sample_n = -1;
      const auto sol = bound_state_energy(mu, row.quasimomentum, opts);
      row.energy = sol.energy;
      row.free_band = sol.ess;
      row.tau_bottom = sol.ess.lo;
      row.tau_top = sol.ess.hi;
      row.gap = sol.edge_gap;
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.status = e.what();
    }
  });
  summarize(report);
  return report;
}

}  // namespace latbound::twobody
