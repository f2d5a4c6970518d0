#pragma once

// Two-boson fiber h_mu(k) = h_0(k) + mu v with the rank-one contact
// interaction (v f)(p) = integral of f. Its bound state is the unique root of
// Delta(z) = 1 + mu G_k(z) outside [E_min(k), E_max(k)], with
// G_k(z) = integral over q of 1 / (E_k(q) - z).

#include <array>
#include <span>
#include <vector>

#include "latbound/band.hpp"
#include "latbound/torus.hpp"

namespace latbound::twobody {

/// Which side of the free band an energy lies on.
enum class Side { below, above };

/// Edges of the two-body free band. E_k(p) = sum_i [4 - 4 c_i cos(p_i - k_i/2)]
/// with c_i = cos(k_i / 2) >= 0, so the edges are sum_i 4 (1 -+ c_i).
struct BandEdges {
  double lo = 0.0;
  double hi = 0.0;
  std::array<double, kMaxDim> half_cos{};
  int dim = 1;
  Interval interval() const { return {lo, hi}; }
};

BandEdges band_edges(const TorusPoint& k);

/// The same interval found by extremum_on_torus on E_k(.), independent of
/// the half-angle form.
Interval essential_interval_scan(const TorusPoint& k);

/// g(t) = integral of 1 / (t + sum_i 4 c_i (1 - cos theta_i)) and
/// t g'(t), for gap t > 0.
struct ReducedGreen {
  double value = 0.0;
  double gap_log_derivative = 0.0;
};

/// Closed form through the complete elliptic integral of the first kind,
/// evaluated with the arithmetic-geometric mean of the complementary modulus.
/// Exact for d = 1 (c_2 = 0) and d = 2.
ReducedGreen reduced_green(std::span<const double> half_cos, double gap);

/// Inner axis in closed form, outer axis by the rectangle rule with n nodes
/// (n doubled from 64 until rel. 1e-13 agreement when n == 0).
double reduced_green_semi_analytic(std::span<const double> half_cos, double gap, int n = 0);

struct GreenValue {
  double value = 0.0;
  /// dG/dz, always positive.
  double dz = 0.0;
};

/// G_k(z) for z at distance `gap` > 0 below (side below) or above the band.
GreenValue greens_at_gap(const TorusPoint& k, double gap, Side side);

/// G_k(z). Throws DomainError for z inside [E_min(k), E_max(k)].
double greens_integral(const TorusPoint& k, double z);
GreenValue greens_integral_with_derivative(const TorusPoint& k, double z);
/// Semi-analytic route: inner axis closed form, outer rectangle rule.
double greens_integral_semi_analytic(const TorusPoint& k, double z, int n = 0);
/// Rectangle rule of 1 / (E_k(q) - z) on UniformGrid(d, n).
double greens_integral_quadrature(const TorusPoint& k, double z, int n);

/// Delta_mu(k; z) = 1 + mu G_k(z).
double determinant(double mu, const TorusPoint& k, double z);
double determinant_at_gap(double mu, const TorusPoint& k, double gap, Side side);

struct SolverOptions {
  /// Root tolerance in z; 0 selects 1e-12 (d=1) or 1e-10 (d=2).
  double tol = 0.0;
  /// Grid points per axis for the stored eigenfunction; 0 selects 256 (d=1)
  /// or 64 (d=2). Negative skips sampling.
  int sample_n = 0;
};

struct TwoBodySolution {
  double mu = 0.0;
  TorusPoint k;
  double energy = 0.0;
  /// |energy - nearest band edge|, carried separately because in d = 2 it
  /// can be far below the spacing of doubles near the edge.
  double edge_gap = 0.0;
  Side side = Side::below;
  Interval ess;
  UniformGrid sample_grid{1, 1};
  std::vector<double> eigenfunction_samples;
  int iterations = 0;
  double residual = 0.0;
};

/// Unique eigenvalue e_mu(k): bisection on the gap to the band edge, then a
/// Newton polish in log(gap). Throws InvalidCoupling for mu == 0 and
/// BracketError if no sign change of Delta is found.
TwoBodySolution bound_state_energy(double mu, const TorusPoint& k,
                                   const SolverOptions& options = {});

/// Value of mu / (E_k(p) - e) at p, before normalization.
double eigenfunction_unnormalized(const TwoBodySolution& sol, const TorusPoint& p);

/// mu / (E_k(p) - e) on the grid, unit discrete norm, positive at the node
/// nearest p = 0.
std::vector<double> eigenfunction(const TwoBodySolution& sol, const UniformGrid& grid);

/// e_mu(k) over UniformGrid(d, n_k), fibers solved on up to `jobs` threads.
BandReport band_scan(double mu, int d, int n_k, int jobs = 1);

}  // namespace latbound::twobody
