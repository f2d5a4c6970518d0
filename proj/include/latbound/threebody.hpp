#pragma once

// Three-boson fiber H_mu(K) = H_0(K) + mu V, where V adds the contact
// interaction of each of the three pairs. Its essential spectrum is the
// channel branch Z(K, p) = e_mu(K - p) + epsilon(p) together with the free
// band [E_min(K), E_max(K)]. Bound states are found through the
// Birman-Schwinger operator
//   (L psi)(p) = -2 mu Delta^{-1/2}(p) int Delta^{-1/2}(q) psi(q) / (E(K;p,q) - z) dq,
// which has eigenvalue 1 exactly at an eigenvalue z of H_mu(K).

#include <span>
#include <vector>

#include "latbound/band.hpp"
#include "latbound/linalg.hpp"
#include "latbound/torus.hpp"

namespace latbound::threebody {

struct ChannelBranch {
  UniformGrid grid{1, 1};
  /// Z(K, p) at the grid nodes.
  std::vector<double> values;
  /// Range of Z with both ends refined by fresh two-body solves.
  Interval range;
  TorusPoint argmin;
  TorusPoint argmax;
};

/// Z(K, p) = e_mu(K - p) + epsilon(p) on UniformGrid(d, n_p); n_p = 0 selects
/// 256 (d=1) or 64 (d=2).
ChannelBranch channel_branch(double mu, const TorusPoint& K, int n_p = 0);

struct SpectrumDecomposition {
  Interval two_particle_branch;
  Interval three_particle_band;
  double tau_bottom = 0.0;
  double tau_top = 0.0;
  /// Minimizer (mu < 0) or maximizer (mu > 0) of Z, where the channel
  /// determinant first vanishes as z approaches the essential spectrum.
  TorusPoint threshold_momentum;

  /// Distance from z to the union of the branch and the band.
  double distance(double z) const;
};

/// Throws ConvergenceError if the branch does not lie strictly outside the
/// free band on the side selected by the sign of mu.
SpectrumDecomposition essential_spectrum(double mu, const TorusPoint& K, int n_p = 0);

/// Delta_mu(K, p; z) = Delta_mu(K - p; z - epsilon(p)) via the two-body path.
double channel_determinant(double mu, const TorusPoint& K, const TorusPoint& p, double z);
/// 1 + mu * rectangle rule of 1 / (E(K; p, q) - z) over q on UniformGrid(d, n).
double channel_determinant_quadrature(double mu, const TorusPoint& K, const TorusPoint& p,
                                      double z, int n);

/// Nystrom discretization of L_mu(K, z) on UniformGrid(d, n).
struct BSOperator {
  double mu = 0.0;
  TorusPoint K;
  double z = 0.0;
  UniformGrid grid{1, 1};
  linalg::Matrix matrix;
  /// Delta^{-1/2}(K, p_i; z).
  std::vector<double> inv_sqrt_delta;
  /// +1 on the bound-state side, where every entry is positive; -1 on the
  /// opposite side of the essential spectrum.
  int sign = 1;
};

/// Entry (i, j) = n^{-d} (-2 mu) Delta_i^{-1/2} Delta_j^{-1/2} / (E(K; p_i, p_j) - z).
/// Throws DomainError for z inside the essential spectrum and InvalidEnergy if
/// Delta is not positive at some node.
BSOperator bs_matrix(double mu, const TorusPoint& K, double z, int n);
BSOperator bs_matrix(double mu, const TorusPoint& K, double z, int n,
                     const SpectrumDecomposition& spectrum);

/// Largest eigenvalue and unit eigenvector, oriented with a nonnegative sum.
linalg::Eigenpair bs_lambda_max(const BSOperator& op, std::span<const double> start = {});

/// det(I - L) as sign and log magnitude.
linalg::SignedLogDet fredholm_det(const BSOperator& op);
double fredholm_det(double mu, const TorusPoint& K, double z, int n);

/// Default Nystrom nodes per axis: 512 (d=1) or 48 (d=2).
int default_nodes(int d);

struct Reconstruction {
  UniformGrid grid{1, 1};
  /// f(p_i, q_j) at flat index i * grid.size() + j, unit discrete norm.
  std::vector<double> f;
  /// phi at the grid nodes, before normalization of f.
  std::vector<double> phi;
  /// max |f(p,q) - f(q,p)| and |f(p,q) - f(p, K-p-q)|, relative to max |f|.
  double symmetry_residual = 0.0;
  /// ||(E(K;.,.) - z) f + mu V f|| / ||f|| with V the three discrete channel sums.
  double schrodinger_residual = 0.0;
  /// min f and max f have the same sign.
  bool single_signed = false;
};

/// f(p,q) = -mu [phi(p) + phi(q) + phi(K-p-q)] / (E(K;p,q) - z) with
/// phi = Delta^{-1} (kernel applied to Delta^{-1/2} psi) / lambda at every point.
Reconstruction reconstruct_eigenfunction(const BSOperator& op, std::span<const double> bs_vector,
                                         double lambda);

struct SolverOptions {
  /// Nystrom nodes per axis; 0 selects default_nodes(d).
  int n = 0;
  /// Bisection width in z.
  double tol = 1e-11;
  /// Channel branch grid, see channel_branch.
  int branch_n = 0;
  bool reconstruct = true;
  /// Samples lambda_max at 10 energies between the far bracket end and the root.
  bool check_monotone = true;
};

struct ThreeBodySolution {
  double mu = 0.0;
  TorusPoint K;
  double energy = 0.0;
  SpectrumDecomposition spectrum;
  int n = 0;
  double lambda = 0.0;
  /// |lambda_max(energy) - 1|.
  double residual = 0.0;
  std::vector<double> bs_vector;
  Reconstruction eigenfunction;
  int iterations = 0;
  /// Energies and lambda_max values of the monotonicity sample.
  std::vector<double> monotone_z;
  std::vector<double> monotone_lambda;
  bool monotone = true;
};

/// Solves lambda_max(z) = 1 by bisection between tau_b - 1e-8 max(1, |tau_b|)
/// and an outward-expanded far end (mirrored above tau_t for mu > 0).
/// Throws InvalidCoupling for mu == 0 and UnresolvedBoundState when
/// lambda_max < 1 next to the threshold.
ThreeBodySolution bound_state_energy(double mu, const TorusPoint& K,
                                     const SolverOptions& options = {});

struct FredholmRoot {
  double energy = 0.0;
  int iterations = 0;
};

/// Zero of det(I - L(z)) nearest the far end, located by a sign scan and
/// bisection independent of the eigenvalue path.
FredholmRoot fredholm_root(double mu, const TorusPoint& K, int n, double tol = 1e-11);

/// E_mu(K) over UniformGrid(d, n_K), fibers solved on up to `jobs` threads.
BandReport band_scan(double mu, int d, int n_K, int n = 0, int jobs = 1);

struct DivergenceSample {
  double z = 0.0;
  /// Integral of 1 / Delta(K, p; z) over p.
  double value = 0.0;
};

/// ||F_z||^2 along a sequence of energies approaching the essential edge,
/// by adaptive Gauss-Kronrod quadrature split at the threshold momentum.
std::vector<DivergenceSample> edge_divergence_diagnostic(double mu, const TorusPoint& K,
                                                         std::span<const double> z_sequence);

/// Least-squares slope of log value against log |tau - z|.
double log_log_slope(std::span<const DivergenceSample> samples, double tau);

}  // namespace latbound::threebody
