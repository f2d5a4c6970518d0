#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "latbound/errors.hpp"
#include "latbound/torus.hpp"

using namespace latbound;

namespace {

TorusPoint random_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  return d == 1 ? TorusPoint(u(rng)) : TorusPoint(u(rng), u(rng));
}

}  // namespace

TEST_CASE("wrap_angle maps into (-pi, pi] with ties to +pi") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_angle(-3 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(2 * kPi + 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double w = wrap_angle(u(rng));
    CHECK(w > -kPi);
    CHECK(w <= kPi);
  }
}

TEST_CASE("torus point arithmetic re-wraps") {
  const TorusPoint a(3.0, -3.0);
  const TorusPoint b(1.0, -1.0);
  const TorusPoint s = a + b;
  CHECK(s[0] == doctest::Approx(4.0 - kTwoPi));
  CHECK(s[1] == doctest::Approx(-4.0 + kTwoPi));
  const TorusPoint n = -TorusPoint(kPi);
  CHECK(n[0] == doctest::Approx(kPi));
  CHECK_THROWS_AS(TorusPoint(1.0) + TorusPoint(1.0, 2.0), DomainError);
  const double three[] = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(TorusPoint::from_coords(three), DomainError);
}

TEST_CASE("uniform grid nodes, weights and negation closure") {
  for (int d : {1, 2}) {
    for (int n : {8, 9, 16}) {
      const UniformGrid g(d, n);
      std::set<std::pair<double, double>> seen;
      double wsum = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const TorusPoint p = g.node(i);
        seen.insert({p[0], d == 2 ? p[1] : 0.0});
        wsum += g.weight();
        CHECK(g.nearest(p) == i);
      }
      CHECK(seen.size() == g.size());
      CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
      if (n % 2 == 0) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          const TorusPoint m = -g.node(i);
          const TorusPoint back = g.node(g.nearest(m));
          for (int a = 0; a < d; ++a) CHECK(std::abs(back[a] - m[a]) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("interval invariant") {
  CHECK_THROWS_AS(Interval(1.0, 0.0), DomainError);
  const Interval i(-1.0, 2.0);
  CHECK(i.distance(-3.0) == 2.0);
  CHECK(i.distance(0.0) == 0.0);
  CHECK(i.distance(5.0) == 3.0);
}

TEST_CASE("dispersion examples and symmetries") {
  CHECK(dispersion(TorusPoint(0.0)) == 0.0);
  CHECK(dispersion(TorusPoint(kPi)) == doctest::Approx(4.0));
  CHECK(dispersion(TorusPoint(kPi / 2, kPi / 2)) == doctest::Approx(4.0));
  std::mt19937_64 rng(11);
  for (int d : {1, 2}) {
    const TorusPoint flip = TorusPoint::pi_vector(d);
    for (int i = 0; i < 200; ++i) {
      const TorusPoint p = random_point(rng, d);
      const double e = dispersion(p);
      CHECK(e >= 0.0);
      CHECK(e <= 4.0 * d + 1e-14);
      CHECK(dispersion(-p) == doctest::Approx(e).epsilon(1e-15));
      CHECK(std::abs(dispersion(p + flip) - (4.0 * d - e)) < 1e-13);
    }
  }
}

TEST_CASE("two-body symbol examples") {
  CHECK(two_body_symbol(TorusPoint(0.0), TorusPoint(0.0)) == 0.0);
  CHECK(two_body_symbol(TorusPoint(0.0), TorusPoint(kPi)) == doctest::Approx(8.0));
  // At k = pi the symbol is flat: 4 - 4 cos(pi/2) cos(p - pi/2) = 4.
  const UniformGrid g(1, 1000);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    worst = std::max(worst, std::abs(two_body_symbol(TorusPoint(kPi), g.node(j)) - 4.0));
  }
  CHECK(worst < 1e-13);
  // Half-angle form 4 - 4 cos(k/2) cos(p - k/2) against direct evaluation.
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const TorusPoint k = random_point(rng, 1);
    const TorusPoint p = random_point(rng, 1);
    const double half = 4.0 - 4.0 * std::cos(k[0] / 2) * std::cos(p[0] - k[0] / 2);
    CHECK(std::abs(two_body_symbol(k, p) - half) < 1e-13);
  }
}

TEST_CASE("three-body symbol examples and relabeling symmetry") {
  const TorusPoint z(0.0);
  CHECK(three_body_symbol(z, z, z) == 0.0);
  CHECK(three_body_symbol(z, TorusPoint(kPi), TorusPoint(kPi)) == doctest::Approx(8.0));
  std::mt19937_64 rng(5);
  for (int d : {1, 2}) {
    for (int i = 0; i < 100; ++i) {
      const TorusPoint K = random_point(rng, d), p = random_point(rng, d), q = random_point(rng, d);
      const double e = three_body_symbol(K, p, q);
      CHECK(std::abs(three_body_symbol(K, q, p) - e) < 1e-13);
      CHECK(std::abs(three_body_symbol(K, p, K - p - q) - e) < 1e-13);
      CHECK(e >= 0.0);
      CHECK(e <= 12.0 * d + 1e-13);
    }
  }
}

TEST_CASE("quadrature examples") {
  CHECK(quadrature([](const TorusPoint&) { return 1.0; }, 1, 7) == doctest::Approx(1.0));
  CHECK(quadrature([](const TorusPoint&) { return 1.0; }, 2, 5) == doctest::Approx(1.0));
  CHECK(std::abs(quadrature([](const TorusPoint& p) { return std::cos(p[0]); }, 1, 16)) < 1e-15);
  const double v = quadrature([](const TorusPoint& p) { return 1.0 / (5.0 - std::cos(p[0])); }, 1, 64);
  CHECK(std::abs(v - 1.0 / std::sqrt(24.0)) < 1e-15);
  CHECK(std::abs(v - 0.2041241452) < 1e-10);
}

TEST_CASE("quadrature is exact for trigonometric polynomials of degree < n") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  for (int d : {1, 2}) {
    const int n = 12;
    // Random polynomial sum_{|m|,|l| < n} a cos(m x + l y) + b sin(...); only
    // the constant term survives integration.
    std::vector<std::array<double, 4>> terms;
    double constant = 0.0;
    for (int m = -(n - 1); m < n; ++m) {
      for (int l = (d == 2 ? -(n - 1) : 0); l < (d == 2 ? n : 1); ++l) {
        const double a = nd(rng), b = nd(rng);
        terms.push_back({double(m), double(l), a, b});
        if (m == 0 && l == 0) constant += a;
      }
    }
    auto f = [&](const TorusPoint& p) {
      double s = 0.0;
      for (const auto& t : terms) {
        const double arg = t[0] * p[0] + (d == 2 ? t[1] * p[1] : 0.0);
        s += t[2] * std::cos(arg) + t[3] * std::sin(arg);
      }
      return s;
    };
    CHECK(std::abs(quadrature(f, d, n) - constant) < 1e-13 * static_cast<double>(terms.size()));
  }
}

TEST_CASE("quadrature reports non-finite integrands with the node") {
  auto f = [](const TorusPoint& p) { return 1.0 / (1.0 - std::cos(p[0])); };
  CHECK_THROWS_AS(quadrature(f, 1, 8), EvaluationError);
  try {
    quadrature(f, 1, 8);
  } catch (const EvaluationError& e) {
    CHECK(e.node().find('(') != std::string::npos);
  }
}

TEST_CASE("adaptive quadrature converges for analytic integrands") {
  const auto r = adaptive_quadrature([](const TorusPoint& p) { return 1.0 / (1.2 - std::cos(p[0])); }, 1);
  CHECK(r.converged);
  CHECK(std::abs(r.value - 1.0 / std::sqrt(1.44 - 1.0)) < 1e-12);
  const auto r2 = adaptive_quadrature(
      [](const TorusPoint& p) { return 1.0 / (3.0 - std::cos(p[0]) - std::cos(p[1])); }, 2);
  CHECK(r2.converged);
}

TEST_CASE("extremum_on_torus examples") {
  const auto m = extremum_on_torus([](const TorusPoint& p) { return dispersion(p); }, 1, Extremum::min);
  CHECK(m.value == doctest::Approx(0.0));
  CHECK(std::abs(m.argument[0]) < 1e-8);

  const TorusPoint k(kPi / 2);
  const auto e = extremum_on_torus([&](const TorusPoint& p) { return two_body_symbol(k, p); }, 1,
                                   Extremum::min);
  CHECK(std::abs(e.value - (4.0 - 4.0 * std::cos(kPi / 4))) < 1e-10);
  CHECK(std::abs(e.value - 1.1715728753) < 1e-10);
}

TEST_CASE("three-body band at K = 0 against a brute-force grid") {
  const TorusPoint K(0.0);
  double bmin = 1e300, bmax = -1e300;
  const int n = 512;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double e = three_body_symbol(K, TorusPoint(-kPi + kTwoPi * i / n), TorusPoint(-kPi + kTwoPi * j / n));
      bmin = std::min(bmin, e);
      bmax = std::max(bmax, e);
    }
  }
  const Interval band = three_particle_band(K);
  // Refinement never does worse than the brute-force grid and lands within
  // the grid's resolution of it.
  CHECK(band.lo <= bmin + 1e-14);
  CHECK(band.hi >= bmax - 1e-14);
  CHECK(bmin - band.lo < 1e-3);
  CHECK(band.hi - bmax < 1e-3);
  // Frozen from the run above: minimum 0 at p = q = 0, maximum 9 at p = q = 2 pi / 3.
  CHECK(std::abs(band.lo) < 1e-10);
  CHECK(std::abs(band.hi - 9.0) < 1e-10);
}

TEST_CASE("three-body minimum is a lower bound at random points") {
  std::mt19937_64 rng(23);
  for (int d : {1, 2}) {
    for (const TorusPoint& K : {TorusPoint::zero(d), random_point(rng, d)}) {
      const Interval band = three_particle_band(K);
      for (int i = 0; i < 1000; ++i) {
        const double e = three_body_symbol(K, random_point(rng, d), random_point(rng, d));
        CHECK(band.lo <= e + 1e-10);
        CHECK(band.hi >= e - 1e-10);
      }
    }
  }
}
