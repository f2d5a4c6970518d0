#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "latbound/errors.hpp"
#include "latbound/oracle.hpp"
#include "latbound/twobody.hpp"

using namespace latbound;
using namespace latbound::oracle;

TEST_CASE("two-body fiber at L = 2") {
  const auto f = finite_two_body(-1.0, TorusPoint(0.0), 2);
  const auto ev = linalg::eigvalsh(f.matrix);
  // diag(0, 8) - 1/2: trace 7, determinant -4.
  CHECK(std::abs(ev[0] - (7.0 - std::sqrt(65.0)) / 2) < 1e-14);
  CHECK(std::abs(ev[1] - (7.0 + std::sqrt(65.0)) / 2) < 1e-14);
  CHECK(std::abs(ev[0] - (-0.5311288741)) < 1e-10);
}

TEST_CASE("two-body fiber: free spectrum and off-grid errors") {
  const auto f = finite_two_body(0.0, TorusPoint(kPi / 2), 8);
  auto ev = linalg::eigvalsh(f.matrix);
  std::vector<double> sym;
  for (int j = 0; j < 8; ++j) sym.push_back(two_body_symbol(TorusPoint(kPi / 2), TorusPoint(kTwoPi * j / 8)));
  std::sort(sym.begin(), sym.end());
  for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(ev[j] - sym[j]) < 1e-14);
  CHECK_THROWS_AS(finite_two_body(-1.0, TorusPoint(0.1), 8), GridError);
  CHECK_THROWS_AS(finite_two_body(-1.0, TorusPoint(0.0), 1), GridError);
}

TEST_CASE("discrete determinant root equals the extremal eigenvalue") {
  for (double mu : {-1.5, 0.7}) {
    for (int d : {1, 2}) {
      const int L = d == 1 ? 24 : 8;
      const TorusPoint k = d == 1 ? TorusPoint(kTwoPi * 5 / L) : TorusPoint(kTwoPi * 3 / L, -kTwoPi / L);
      const auto ev = linalg::eigvalsh(finite_two_body(mu, k, L).matrix);
      const double root = discrete_bound_state(mu, k, L);
      CHECK(std::abs(root - (mu < 0 ? ev.front() : ev.back())) < 1e-10);
      CHECK(std::abs(discrete_determinant(mu, k, L, root)) < 1e-9);
    }
  }
}

TEST_CASE("two-body oracle converges to the closed form") {
  const double exact = 4.0 - std::sqrt(17.0);
  CHECK(std::abs(discrete_bound_state(-1.0, TorusPoint(0.0), 4096) - exact) < 1e-6);
  const int Ls[] = {32, 64, 128};
  const auto r = two_body_energy(-1.0, TorusPoint(0.0), Ls);
  CHECK(std::abs(r.extrapolation.energy - exact) < 1e-9);
  const double d2 = twobody::bound_state_energy(-0.5, TorusPoint(0.0, 0.0)).energy;
  const auto r2 = two_body_energy(-0.5, TorusPoint(0.0, 0.0), Ls);
  CHECK(d2 < 0.0);
  CHECK(std::abs(r2.extrapolation.energy - d2) < 2e-6);
}

TEST_CASE("three-body fiber structure") {
  const TorusPoint K(kTwoPi * 3 / 8);
  const auto f = finite_three_body(-1.3, K, 8);
  CHECK(f.matrix.asymmetry() < 1e-15);
  // The symmetrizer commutes with the fiber.
  std::vector<double> v(64), hv(64), pv, hpv(64);
  for (std::size_t i = 0; i < 64; ++i) v[i] = std::sin(1.0 + 0.37 * static_cast<double>(i * i));
  linalg::multiply(f.matrix, v, hv);
  const auto phv = symmetrize_vector(f, hv);
  pv = symmetrize_vector(f, v);
  linalg::multiply(f.matrix, pv, hpv);
  double worst = 0.0;
  for (std::size_t i = 0; i < 64; ++i) worst = std::max(worst, std::abs(phv[i] - hpv[i]));
  CHECK(worst < 1e-12);

  const auto free = finite_three_body(0.0, K, 8);
  const auto ev = linalg::eigvalsh(free.matrix);
  std::vector<double> sym;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) sym.push_back(three_body_symbol(K, TorusPoint(kTwoPi * i / 8), TorusPoint(kTwoPi * j / 8)));
  }
  std::sort(sym.begin(), sym.end());
  for (std::size_t j = 0; j < sym.size(); ++j) CHECK(std::abs(ev[j] - sym[j]) < 1e-13);
  CHECK_THROWS_AS(finite_three_body(-1.0, TorusPoint(0.0), 128), SizeError);
}

TEST_CASE("bosonic basis reproduces the filtered full-space spectrum") {
  for (double mu : {-2.0, 1.0}) {
    for (int L : {9, 12}) {
      const TorusPoint K(kTwoPi * 2 / L);
      const auto full = classify_spectrum(finite_three_body(mu, K, L));
      const auto orb = classify_spectrum(bosonic_three_body(mu, K, L));
      REQUIRE(full.bosonic_spectrum.size() == orb.bosonic_spectrum.size());
      for (std::size_t i = 0; i < full.bosonic_spectrum.size(); ++i) {
        CHECK(std::abs(full.bosonic_spectrum[i] - orb.bosonic_spectrum[i]) < 1e-10);
      }
    }
  }
}

TEST_CASE("classify_spectrum examples") {
  const auto down = classify_spectrum(finite_three_body(-2.0, TorusPoint(0.0), 32, 1100));
  CHECK(down.isolated_below.size() == 1);
  CHECK(down.isolated_above.empty());
  // The isolated state lies below every discrete channel value.
  CHECK(down.isolated_below[0] < down.cluster_core.lo);

  const auto up = classify_spectrum(bosonic_three_body(2.0, TorusPoint(0.0), 32));
  CHECK(up.isolated_below.empty());
  CHECK(up.isolated_above.size() >= 1);

  const auto none = classify_spectrum(bosonic_three_body(0.0, TorusPoint(0.0), 16));
  CHECK(none.isolated_below.empty());
  CHECK(none.isolated_above.empty());
}

TEST_CASE("bosonic ground state is nonincreasing in |mu|") {
  double prev = INFINITY;
  for (double mu : {-0.25, -0.5, -1.0, -2.0, -4.0}) {
    const double e = classify_spectrum(bosonic_three_body(mu, TorusPoint(0.0), 16)).bosonic_spectrum.front();
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("finite-volume duality") {
  const int L = 16;
  const TorusPoint K(kTwoPi * 3 / L);
  const auto a = linalg::eigvalsh(finite_three_body(-1.7, K, L).matrix);
  auto b = linalg::eigvalsh(finite_three_body(1.7, K + TorusPoint::pi_vector(1), L).matrix);
  for (double& x : b) x = 12.0 - x;
  std::sort(b.begin(), b.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  CHECK(worst < 1e-10);
}

TEST_CASE("extrapolation") {
  const int L[] = {16, 32, 64};
  const double flat[] = {1.5, 1.5, 1.5};
  const auto c = extrapolate(flat, L);
  CHECK(c.energy == 1.5);
  CHECK(c.error == 0.0);
  const double model[] = {0.3 + 2.0 / 256, 0.3 + 2.0 / 1024, 0.3 + 2.0 / 4096};
  const auto m = extrapolate(model, L);
  CHECK(std::abs(m.energy - 0.3) < 1e-12);
  CHECK(std::abs(m.exponent - 2.0) < 1e-9);
  CHECK(m.extrapolated);
  const double zigzag[] = {1.0, 1.1, 1.05};
  const auto z = extrapolate(zigzag, L);
  CHECK(!z.warning.empty());
  CHECK(z.energy == 1.05);
  CHECK(std::abs(z.error - 0.15) < 1e-12);
  const int bad[] = {16, 32, 48};
  CHECK_THROWS_AS(extrapolate(flat, bad), DomainError);
}

TEST_CASE("three-body oracle energy in d = 1") {
  const int Ls[] = {16, 32, 64};
  const auto r = three_body_energy(-2.0, TorusPoint(0.0), Ls);
  REQUIRE(r.energies.size() == 3);
  CHECK(r.energies.back() < r.reports.back().cluster.lo);
  CHECK(r.extrapolation.error < 1e-8);
}
