#pragma once

// Geometry of the d-dimensional torus (-pi, pi]^d, d in {1, 2}: quasimomenta,
// uniform product grids, the lattice dispersion and the two- and three-body
// kinetic symbols, Haar quadrature and extremum search.

#include <array>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace latbound {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr int kMaxDim = 2;

/// Maps an arbitrary real into (-pi, pi]. -pi itself maps to +pi.
double wrap_angle(double x);

class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(double x);
  TorusPoint(double x, double y);

  /// Throws DomainError unless coords.size() is 1 or 2.
  static TorusPoint from_coords(std::span<const double> coords);
  static TorusPoint zero(int d);
  /// The corner (pi, ..., pi).
  static TorusPoint pi_vector(int d);

  int dim() const { return dim_; }
  double operator[](int axis) const { return c_[static_cast<std::size_t>(axis)]; }
  std::span<const double> coords() const {
    return {c_.data(), static_cast<std::size_t>(dim_)};
  }

  friend TorusPoint operator+(const TorusPoint& a, const TorusPoint& b);
  friend TorusPoint operator-(const TorusPoint& a, const TorusPoint& b);
  friend TorusPoint operator-(const TorusPoint& a);
  friend bool operator==(const TorusPoint& a, const TorusPoint& b) = default;

  std::string to_string() const;

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 1;
};

/// Uniform product grid with n nodes per axis at wrap(-pi + 2 pi j / n) and
/// equal weights 1/n^d. Flat indices are row-major with axis 0 slowest.
class UniformGrid {
 public:
  UniformGrid(int d, int n);

  int dim() const { return d_; }
  int per_axis() const { return n_; }
  std::size_t size() const { return size_; }
  double weight() const { return 1.0 / static_cast<double>(size_); }

  double axis_node(int j) const;
  TorusPoint node(std::size_t flat) const;
  std::array<int, kMaxDim> axis_indices(std::size_t flat) const;
  std::size_t flat_index(std::array<int, kMaxDim> idx) const;
  std::size_t nearest(const TorusPoint& p) const;

 private:
  int d_;
  int n_;
  std::size_t size_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  /// Throws DomainError if lo > hi.
  Interval(double lo, double hi);

  bool contains(double x) const { return lo <= x && x <= hi; }
  double width() const { return hi - lo; }
  /// Distance from x to the interval, zero inside.
  double distance(double x) const;
};

/// x with 12 significant digits.
std::string to_text(double x);

/// epsilon(p) = 2 sum_i (1 - cos p_i).
double dispersion(const TorusPoint& p);
/// epsilon(k - p) + epsilon(p).
double two_body_symbol(const TorusPoint& k, const TorusPoint& p);
/// epsilon(K - p - q) + epsilon(p) + epsilon(q).
double three_body_symbol(const TorusPoint& K, const TorusPoint& p,
                         const TorusPoint& q);

using TorusFunction = std::function<double(const TorusPoint&)>;

/// Rectangle rule (1/n^d) sum over UniformGrid(d, n). Throws EvaluationError
/// carrying the node if the integrand is not finite there.
double quadrature(const TorusFunction& f, int d, int n);

struct AdaptiveQuadrature {
  double value = 0.0;
  int n = 0;
  bool converged = false;
};

/// Doubles n from 16 until two successive values agree to rel. 1e-12 (d=1)
/// or 1e-9 (d=2), with n capped at 4096 (d=1) or 256 per axis (d=2).
AdaptiveQuadrature adaptive_quadrature(const TorusFunction& f, int d);

enum class Extremum { min, max };

struct ExtremumOptions {
  /// Scan points per axis; 0 selects 256 for total dimension <= 2 and 48
  /// for total dimension 4.
  int scan_n = 0;
  double step_tol = 1e-12;
  long max_evaluations = 2'000'000;
};

struct ExtremumResult {
  double value = 0.0;
  /// Wrapped coordinates of the extremizer, one per scalar dimension.
  std::vector<double> argument;
  long evaluations = 0;
};

/// Dense grid scan over the torus of dimension `total_dim` (1, 2 or 4)
/// followed by coordinate descent with a halving step until the step drops
/// below options.step_tol.
ExtremumResult extremum_on_torus(
    const std::function<double(std::span<const double>)>& f, int total_dim,
    Extremum mode, const ExtremumOptions& options = {});

/// Convenience form for functions of a single TorusPoint.
ExtremumResult extremum_on_torus(const TorusFunction& f, int d, Extremum mode,
                                 const ExtremumOptions& options = {});

/// Extremum of E(K; p, q) over (p, q).
ExtremumResult three_body_symbol_extremum(const TorusPoint& K, Extremum mode);

/// [E_min(K), E_max(K)], the spectrum of the free three-body fiber.
Interval three_particle_band(const TorusPoint& K);

}  // namespace latbound
