#include "latbound/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "latbound/errors.hpp"

namespace latbound {

double wrap_angle(double x) {
  double r = std::fmod(x + kPi, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - kPi;
}

TorusPoint::TorusPoint(double x) : dim_(1) { c_[0] = wrap_angle(x); }

TorusPoint::TorusPoint(double x, double y) : dim_(2) {
  c_[0] = wrap_angle(x);
  c_[1] = wrap_angle(y);
}

TorusPoint TorusPoint::from_coords(std::span<const double> coords) {
  if (coords.size() == 1) return TorusPoint(coords[0]);
  if (coords.size() == 2) return TorusPoint(coords[0], coords[1]);
  throw DomainError("torus point must have 1 or 2 coordinates, got " +
                    std::to_string(coords.size()));
}

TorusPoint TorusPoint::zero(int d) {
  if (d == 1) return TorusPoint(0.0);
  if (d == 2) return TorusPoint(0.0, 0.0);
  throw DomainError("dimension must be 1 or 2");
}

TorusPoint TorusPoint::pi_vector(int d) {
  if (d == 1) return TorusPoint(kPi);
  if (d == 2) return TorusPoint(kPi, kPi);
  throw DomainError("dimension must be 1 or 2");
}

namespace {

void require_same_dim(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim()) throw DomainError("torus points of different dimension");
}

}  // namespace

TorusPoint operator+(const TorusPoint& a, const TorusPoint& b) {
  require_same_dim(a, b);
  return a.dim() == 1 ? TorusPoint(a[0] + b[0]) : TorusPoint(a[0] + b[0], a[1] + b[1]);
}

TorusPoint operator-(const TorusPoint& a, const TorusPoint& b) {
  require_same_dim(a, b);
  return a.dim() == 1 ? TorusPoint(a[0] - b[0]) : TorusPoint(a[0] - b[0], a[1] - b[1]);
}

TorusPoint operator-(const TorusPoint& a) {
  return a.dim() == 1 ? TorusPoint(-a[0]) : TorusPoint(-a[0], -a[1]);
}

std::string to_text(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string TorusPoint::to_string() const {
  char buf[64];
  if (dim_ == 1) {
    std::snprintf(buf, sizeof buf, "(%.12g)", c_[0]);
  } else {
    std::snprintf(buf, sizeof buf, "(%.12g, %.12g)", c_[0], c_[1]);
  }
  return buf;
}

UniformGrid::UniformGrid(int d, int n) : d_(d), n_(n) {
  if (d < 1 || d > kMaxDim) throw DomainError("grid dimension must be 1 or 2");
  if (n < 1) throw DomainError("grid needs at least one node per axis");
  size_ = d == 1 ? static_cast<std::size_t>(n)
                 : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
}

double UniformGrid::axis_node(int j) const {
  return wrap_angle(-kPi + kTwoPi * static_cast<double>(j) / static_cast<double>(n_));
}

std::array<int, kMaxDim> UniformGrid::axis_indices(std::size_t flat) const {
  if (d_ == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat / static_cast<std::size_t>(n_)),
          static_cast<int>(flat % static_cast<std::size_t>(n_))};
}

std::size_t UniformGrid::flat_index(std::array<int, kMaxDim> idx) const {
  auto m = [this](int j) { return static_cast<std::size_t>(((j % n_) + n_) % n_); };
  if (d_ == 1) return m(idx[0]);
  return m(idx[0]) * static_cast<std::size_t>(n_) + m(idx[1]);
}

TorusPoint UniformGrid::node(std::size_t flat) const {
  const auto idx = axis_indices(flat);
  if (d_ == 1) return TorusPoint(axis_node(idx[0]));
  return TorusPoint(axis_node(idx[0]), axis_node(idx[1]));
}

std::size_t UniformGrid::nearest(const TorusPoint& p) const {
  if (p.dim() != d_) throw DomainError("point dimension does not match grid");
  std::array<int, kMaxDim> idx{};
  for (int a = 0; a < d_; ++a) {
    // Nodes sit at -pi + 2 pi j / n.
    const double j = (p[a] + kPi) * static_cast<double>(n_) / kTwoPi;
    idx[static_cast<std::size_t>(a)] = static_cast<int>(std::lround(j));
  }
  return flat_index(idx);
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo <= hi)) throw DomainError("interval with lo > hi");
}

double Interval::distance(double x) const {
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

double dispersion(const TorusPoint& p) {
  double s = 0.0;
  for (int a = 0; a < p.dim(); ++a) s += 2.0 * (1.0 - std::cos(p[a]));
  return s;
}

double two_body_symbol(const TorusPoint& k, const TorusPoint& p) {
  return dispersion(k - p) + dispersion(p);
}

double three_body_symbol(const TorusPoint& K, const TorusPoint& p,
                         const TorusPoint& q) {
  return dispersion(K - p - q) + dispersion(p) + dispersion(q);
}

double quadrature(const TorusFunction& f, int d, int n) {
  const UniformGrid grid(d, n);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const TorusPoint p = grid.node(i);
    const double v = f(p);
    if (!std::isfinite(v)) throw EvaluationError("non-finite integrand", p.to_string());
    sum += v;
  }
  return sum * grid.weight();
}

AdaptiveQuadrature adaptive_quadrature(const TorusFunction& f, int d) {
  const double rtol = d == 1 ? 1e-12 : 1e-9;
  const int cap = d == 1 ? 4096 : 256;
  AdaptiveQuadrature out;
  int n = 16;
  double prev = quadrature(f, d, n);
  while (n < cap) {
    n *= 2;
    const double cur = quadrature(f, d, n);
    const bool done = std::abs(cur - prev) <= rtol * std::max(std::abs(cur), 1e-300);
    prev = cur;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.value = prev;
  out.n = n;
  return out;
}

namespace {

int default_scan(int total_dim) {
  switch (total_dim) {
    case 1:
    case 2:
      return 256;
    case 4:
      return 48;
    default:
      throw DomainError("extremum search supports total dimension 1, 2 or 4");
  }
}

}  // namespace

ExtremumResult extremum_on_torus(
    const std::function<double(std::span<const double>)>& f, int total_dim,
    Extremum mode, const ExtremumOptions& options) {
  const int n = options.scan_n > 0 ? options.scan_n : default_scan(total_dim);
  const auto dim = static_cast<std::size_t>(total_dim);
  const double sign = mode == Extremum::min ? 1.0 : -1.0;

  std::vector<double> axis(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) axis[static_cast<std::size_t>(j)] = wrap_angle(-kPi + kTwoPi * j / n);

  ExtremumResult res;
  std::vector<double> x(dim), best(dim);
  double best_val = std::numeric_limits<double>::infinity();
  long total = 1;
  for (std::size_t a = 0; a < dim; ++a) total *= n;
  for (long flat = 0; flat < total; ++flat) {
    long rest = flat;
    for (std::size_t a = dim; a-- > 0;) {
      x[a] = axis[static_cast<std::size_t>(rest % n)];
      rest /= n;
    }
    const double v = sign * f(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  }
  res.evaluations = total;

  double step = kTwoPi / n;
  std::vector<double> trial(dim);
  while (step >= options.step_tol && res.evaluations < options.max_evaluations) {
    bool improved = false;
    for (std::size_t a = 0; a < dim; ++a) {
      for (double dir : {1.0, -1.0}) {
        trial = best;
        trial[a] = wrap_angle(best[a] + dir * step);
        const double v = sign * f(trial);
        ++res.evaluations;
        if (v < best_val) {
          best_val = v;
          best = trial;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  res.value = sign * best_val;
  res.argument = std::move(best);
  return res;
}

ExtremumResult extremum_on_torus(const TorusFunction& f, int d, Extremum mode,
                                 const ExtremumOptions& options) {
  return extremum_on_torus(
      [&f](std::span<const double> x) { return f(TorusPoint::from_coords(x)); }, d,
      mode, options);
}

ExtremumResult three_body_symbol_extremum(const TorusPoint& K, Extremum mode) {
  const int d = K.dim();
  // Expanded in cosines so the 48^4 scan for d=2 stays cheap.
  auto f = [&K, d](std::span<const double> x) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      const double p = x[static_cast<std::size_t>(a)];
      const double q = x[static_cast<std::size_t>(d + a)];
      s += 6.0 - 2.0 * (std::cos(K[a] - p - q) + std::cos(p) + std::cos(q));
    }
    return s;
  };
  return extremum_on_torus(f, 2 * d, mode);
}

Interval three_particle_band(const TorusPoint& K) {
  return {three_body_symbol_extremum(K, Extremum::min).value,
          three_body_symbol_extremum(K, Extremum::max).value};
}

}  // namespace latbound
