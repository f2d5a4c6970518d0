#pragma once

// Finite-volume exact diagonalization. Momenta live on the L-point grid
// 2 pi m / L per axis and the Haar integral becomes the average over L^d
// points. Grid momenta are carried as integer indices, so p + q - t and
// K - p - q are exact.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "latbound/linalg.hpp"
#include "latbound/torus.hpp"

namespace latbound::oracle {

using Index = std::array<int, kMaxDim>;

/// Integer coordinates of an on-grid quasimomentum. Throws GridError if a
/// component is not a multiple of 2 pi / L within 1e-9.
Index grid_index(const TorusPoint& k, int L);
TorusPoint grid_point(const Index& m, int d, int L);

enum class FiberKind { two_body, three_body };

struct FiniteFiber {
  int d = 1;
  int L = 2;
  double mu = 0.0;
  TorusPoint quasimomentum;
  FiberKind kind = FiberKind::two_body;
  linalg::Matrix matrix;
};

/// diag(E_k(p_j)) + (mu / L^d) * ones.
FiniteFiber finite_two_body(double mu, const TorusPoint& k, int L);

/// 1 + (mu / L^d) sum_j 1 / (E_k(p_j) - z).
double discrete_determinant(double mu, const TorusPoint& k, int L, double z);
/// The root of discrete_determinant below min E_k (mu < 0) or above max E_k
/// (mu > 0): the extremal eigenvalue of finite_two_body.
double discrete_bound_state(double mu, const TorusPoint& k, int L);

inline constexpr std::size_t kDenseBudget = 6000;

/// Full L^{2d} fiber indexed by (p_i, q_j), r = K - p - q. Each pair
/// interaction conserves the momentum of the third particle:
///   H[(p,q),(p',q')] = E delta + (mu / L^d)(delta_{p p'} + delta_{q q'} + delta_{r r'}).
/// Throws SizeError above `budget`.
FiniteFiber finite_three_body(double mu, const TorusPoint& K, int L,
                              std::size_t budget = kDenseBudget);

/// The same operator restricted to the symmetric sector, in the basis of
/// normalized momentum multisets {p, q, r}.
struct BosonicFiber {
  int d = 1;
  int L = 2;
  double mu = 0.0;
  TorusPoint quasimomentum;
  linalg::Matrix matrix;
  /// Orbit representatives as flat grid indices.
  std::vector<std::array<std::size_t, 3>> orbits;
};

BosonicFiber bosonic_three_body(double mu, const TorusPoint& K, int L,
                                std::size_t budget = kDenseBudget);

struct ClassifyOptions {
  /// Cluster fattening in units of the level spacing at each cluster edge.
  double fattening = 3.0;
  /// Eigenvectors count as bosonic when ||P v||^2 > 1 - tol.
  double symmetry_tol = 1e-8;
};

struct OracleReport {
  std::vector<double> isolated_below;
  std::vector<double> isolated_above;
  /// Hull of the discrete channel values and the free energies, fattened.
  Interval cluster;
  /// Cluster before fattening.
  Interval cluster_core;
  /// Level spacing used at the lower and upper edge: the smaller of the
  /// median bosonic spacing and the first nondegenerate gap of the set
  /// (discrete channel values or free energies) attaining that edge.
  double spacing_below = 0.0;
  double spacing_above = 0.0;
  /// Bosonic eigenvalues, ascending.
  std::vector<double> bosonic_spectrum;
};

/// Bosonic eigenvalues by post-filtering the full-space eigenvectors;
/// degenerate multiplets are resolved on the projected subspace.
OracleReport classify_spectrum(const FiniteFiber& fiber, const ClassifyOptions& options = {});
OracleReport classify_spectrum(const BosonicFiber& fiber, const ClassifyOptions& options = {});

/// Applies the symmetrizer over the six permutations of (p, q, r) to a
/// full-space vector.
std::vector<double> symmetrize_vector(const FiniteFiber& fiber, std::span<const double> v);

struct Extrapolation {
  double energy = 0.0;
  double error = 0.0;
  /// Fitted convergence exponent in L; 0 when not extrapolated.
  double exponent = 0.0;
  bool extrapolated = false;
  std::string warning;
};

/// Richardson extrapolation of the last three values, assuming algebraic
/// convergence with an exponent fitted from successive differences. L must
/// be a geometric progression with at least three entries.
Extrapolation extrapolate(std::span<const double> values, std::span<const int> L);

struct OracleEnergy {
  std::vector<int> L;
  /// Extremal isolated energy on the bound side at each L.
  std::vector<double> energies;
  std::vector<OracleReport> reports;
  Extrapolation extrapolation;
};

/// Lowest (mu < 0) or highest (mu > 0) isolated bosonic energy of the
/// three-body fiber over an L sequence. With fewer than three sizes the last
/// value is returned with error |last - previous|.
OracleEnergy three_body_energy(double mu, const TorusPoint& K, std::span<const int> L,
                               const ClassifyOptions& options = {});
OracleEnergy two_body_energy(double mu, const TorusPoint& k, std::span<const int> L);

}  // namespace latbound::oracle
