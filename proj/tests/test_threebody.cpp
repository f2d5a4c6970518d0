#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "latbound/errors.hpp"
#include "latbound/threebody.hpp"
#include "latbound/twobody.hpp"

using namespace latbound;
using namespace latbound::threebody;

namespace {

TorusPoint random_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  return d == 1 ? TorusPoint(u(rng)) : TorusPoint(u(rng), u(rng));
}

SolverOptions fast(int n) {
  SolverOptions o;
  o.n = n;
  o.reconstruct = false;
  o.check_monotone = false;
  return o;
}

double lambda_at(double mu, const TorusPoint& K, double z, int n) {
  return bs_lambda_max(bs_matrix(mu, K, z, n)).value;
}

}  // namespace

TEST_CASE("channel branch") {
  const TorusPoint K(0.0);
  const auto b = channel_branch(-1.0, K, 256);
  // Both summands are minimal at p = 0.
  CHECK(std::abs(b.range.lo - (4.0 - std::sqrt(17.0))) < 1e-10);
  CHECK(std::abs(b.argmin[0]) < 1e-6);
  const auto b2 = channel_branch(-1.0, TorusPoint(0.7), 512);
  const auto b1 = channel_branch(-1.0, TorusPoint(0.7), 256);
  CHECK(std::abs(b1.range.lo - b2.range.lo) < 1e-8);
  CHECK(std::abs(b1.range.hi - b2.range.hi) < 1e-8);
  // Z(K, K) = e(0) + epsilon(K).
  const TorusPoint Kq(1.1);
  const auto bq = channel_branch(-1.5, Kq, 64);
  const double z_at_k = twobody::bound_state_energy(-1.5, TorusPoint(0.0)).energy + dispersion(Kq);
  CHECK(bq.range.contains(z_at_k));
  for (std::size_t i = 0; i < bq.grid.size(); i += 7) {
    const TorusPoint p = bq.grid.node(i);
    CHECK(std::abs(bq.values[i] - (twobody::bound_state_energy(-1.5, Kq - p).energy + dispersion(p))) < 1e-14);
  }
}

TEST_CASE("essential spectrum: the branch leaves the free band on the coupling side") {
  std::mt19937_64 rng(31);
  for (int d : {1, 2}) {
    for (int i = 0; i < 4; ++i) {
      const TorusPoint K = random_point(rng, d);
      const auto below = essential_spectrum(-1.0, K);
      CHECK(below.tau_bottom < below.three_particle_band.lo - 1e-10);
      CHECK(below.tau_top == below.three_particle_band.hi);
      const auto above = essential_spectrum(1.0, K);
      CHECK(above.tau_top > above.three_particle_band.hi + 1e-10);
    }
  }
  const auto weak = essential_spectrum(-1e-6, TorusPoint(0.0));
  CHECK(weak.tau_bottom < weak.three_particle_band.lo);
  CHECK(weak.three_particle_band.lo - weak.tau_bottom < 1e-9);
}

TEST_CASE("channel determinant: two evaluation paths") {
  const TorusPoint K(0.4);
  CHECK(channel_determinant(-1.0, K, TorusPoint(0.0), -2.0) == twobody::determinant(-1.0, K, -2.0));
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> off(0.5, 6.0), mu_d(-3.0, 3.0);
  for (int d : {1, 2}) {
    for (int i = 0; i < 15; ++i) {
      const TorusPoint Kr = random_point(rng, d), p = random_point(rng, d);
      const double mu = mu_d(rng);
      const double z = twobody::band_edges(Kr - p).lo + dispersion(p) - off(rng);
      CHECK(std::abs(channel_determinant(mu, Kr, p, z) -
                     channel_determinant_quadrature(mu, Kr, p, z, 256)) < 1e-10);
    }
  }
  // At z = Z(K, p) the channel determinant vanishes.
  const TorusPoint p(1.3);
  const double zk = twobody::bound_state_energy(-2.0, K - p).energy + dispersion(p);
  CHECK(std::abs(channel_determinant(-2.0, K, p, zk)) < 1e-9);
}

TEST_CASE("Birman-Schwinger matrix structure") {
  const TorusPoint K(0.0);
  const auto s = essential_spectrum(-1.0, K);
  const auto op = bs_matrix(-1.0, K, s.tau_bottom - 0.5, 128, s);
  CHECK(op.sign == 1);
  CHECK(op.matrix.asymmetry() == 0.0);
  CHECK(*std::min_element(op.matrix.data().begin(), op.matrix.data().end()) > 0.0);

  // lambda_max rises toward the edge.
  double prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double z = s.tau_bottom - std::pow(10.0, 1.0 - 0.6 * i);
    const double l = bs_lambda_max(bs_matrix(-1.0, K, z, 128, s)).value;
    CHECK(l > prev);
    prev = l;
  }
  const double z0 = s.tau_bottom - 0.3;
  CHECK(std::abs(lambda_at(-1.0, K, z0, 256) - lambda_at(-1.0, K, z0, 512)) < 1e-8);

  const auto far = bs_lambda_max(bs_matrix(-1.0, K, s.tau_bottom - 1e4, 64, s));
  CHECK(far.value > 0.0);
  CHECK(far.value < 1e-3);
  const auto top = bs_lambda_max(op);
  CHECK(*std::min_element(top.vector.begin(), top.vector.end()) > -1e-12);
}

TEST_CASE("Birman-Schwinger matrix domain errors") {
  const TorusPoint K(0.0);
  const auto s = essential_spectrum(-1.0, K);
  CHECK_THROWS_AS(bs_matrix(-1.0, K, 0.5 * (s.tau_bottom + s.tau_top), 16, s), DomainError);
  CHECK_THROWS_AS(bs_matrix(0.0, K, -5.0, 16, s), InvalidCoupling);
  // A threshold placed too high leaves nodes with nonpositive Delta.
  SpectrumDecomposition wrong = s;
  wrong.tau_bottom = s.tau_bottom + 0.1;
  wrong.two_particle_branch = Interval(wrong.tau_bottom, s.two_particle_branch.hi);
  CHECK(s.tau_bottom + 0.05 < s.three_particle_band.lo);
  CHECK_THROWS_AS(bs_matrix(-1.0, K, s.tau_bottom + 0.05, 16, wrong), InvalidEnergy);
}

TEST_CASE("three-body bound state in d = 1") {
  SolverOptions opts;
  opts.n = 256;
  const auto sol = bound_state_energy(-2.0, TorusPoint(0.0), opts);
  // Frozen from the finite-volume oracle, L = 128 (converged to 1e-12).
  CHECK(std::abs(sol.energy - (-2.038607689676)) < 1e-5);
  CHECK(sol.energy < sol.spectrum.tau_bottom);
  CHECK(sol.residual < 1e-10);
  CHECK(sol.monotone);
  CHECK(sol.eigenfunction.symmetry_residual < 1e-8);
  CHECK(sol.eigenfunction.schrodinger_residual < 1e-6);
  CHECK(sol.eigenfunction.single_signed);

  const auto up = bound_state_energy(2.0, TorusPoint(kPi / 2), opts);
  CHECK(up.energy > up.spectrum.tau_top);
  CHECK(up.eigenfunction.symmetry_residual < 1e-8);
  CHECK(up.eigenfunction.schrodinger_residual < 1e-6);

  CHECK_THROWS_AS(bound_state_energy(0.0, TorusPoint(0.0)), InvalidCoupling);
}

TEST_CASE("three-body duality E_mu(K) = 12 d - E_{-mu}(K + pi)") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> mu_d(0.5, 3.0);
  for (int i = 0; i < 3; ++i) {
    const double mu = -mu_d(rng);
    const TorusPoint K = random_point(rng, 1);
    const double a = bound_state_energy(mu, K, fast(128)).energy;
    const double b = bound_state_energy(-mu, K + TorusPoint::pi_vector(1), fast(128)).energy;
    CHECK(std::abs(a - (12.0 - b)) < 1e-8);
  }
}

TEST_CASE("bound state lies below tau_b across a K grid") {
  const UniformGrid g(1, 16);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto sol = bound_state_energy(-1.0, g.node(i), fast(128));
    CHECK(sol.energy < sol.spectrum.tau_bottom);
  }
}

TEST_CASE("no Birman-Schwinger eigenvalue 1 on the wrong side") {
  for (double mu : {-2.0, 2.0}) {
    const TorusPoint K(0.9);
    const auto s = essential_spectrum(mu, K);
    for (double dist : {0.1, 1.0, 10.0}) {
      const double z = mu < 0.0 ? s.tau_top + dist : s.tau_bottom - dist;
      const auto op = bs_matrix(mu, K, z, 128, s);
      CHECK(op.sign == -1);
      CHECK(bs_lambda_max(op).value < 1.0);
    }
  }
}

TEST_CASE("Fredholm determinant root matches the eigenvalue root") {
  const TorusPoint K(0.0);
  const auto sol = bound_state_energy(-2.0, K, fast(256));
  const auto root = fredholm_root(-2.0, K, 256);
  CHECK(std::abs(root.energy - sol.energy) < 1e-9);
  CHECK(fredholm_det(-2.0, K, sol.energy - 1e-3, 256) > 0.0);
  CHECK(fredholm_det(-2.0, K, sol.energy + 1e-3, 256) < 0.0);
  const auto s = essential_spectrum(-2.0, K);
  // D - 1 decays like 1 / |z|.
  const double d4 = fredholm_det(-2.0, K, s.tau_bottom - 1e4, 128) - 1.0;
  const double d6 = fredholm_det(-2.0, K, s.tau_bottom - 1e6, 128) - 1.0;
  CHECK(std::abs(d4) < 1e-3);
  CHECK(std::abs(d6 / d4 - 1e-2) < 1e-3);
}

TEST_CASE("three-body band scan") {
  const auto strong = band_scan(-10.0, 1, 16, 128);
  CHECK(strong.all_ok);
  CHECK(strong.isolated);
  CHECK(strong.min_gap > 0.0);
  CHECK(strong.rows.size() == 16);
  // Nodes j and n - j are mirror images; j = 0 is K = pi.
  for (std::size_t j = 1; j < 8; ++j) {
    CHECK(std::abs(strong.rows[j].energy - strong.rows[16 - j].energy) < 1e-9);
  }
  const auto weak = band_scan(-0.2, 1, 8, 128);
  CHECK(weak.rows.size() == 8);
}

TEST_CASE("edge divergence of the channel functional") {
  const TorusPoint K(0.0);
  const auto s = essential_spectrum(-1.0, K);
  std::vector<double> zs;
  for (int m = 1; m <= 6; ++m) zs.push_back(s.tau_bottom - std::pow(10.0, -m));
  const auto v = edge_divergence_diagnostic(-1.0, K, zs);
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i].value > v[i - 1].value);
  const double slope = log_log_slope(std::span(v).subspan(3), s.tau_bottom);
  CHECK(std::abs(slope + 0.5) < 0.15);
  const double far_z = s.tau_bottom - 10.0;
  const auto far = edge_divergence_diagnostic(-1.0, K, std::span(&far_z, 1));
  CHECK(std::isfinite(far[0].value));
  CHECK(far[0].value < 10.0);
  const double inside = s.tau_bottom + 0.1;
  CHECK_THROWS_AS(edge_divergence_diagnostic(-1.0, K, std::span(&inside, 1)), DomainError);
}
