#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "cli/cli.hpp"
#include "latbound/errors.hpp"
#include "latbound/oracle.hpp"
#include "latbound/threebody.hpp"
#include "latbound/twobody.hpp"

namespace latbound::cli {

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::string name;
  int d = 1;
  bool quick = false;
  std::function<Result()> run;
};

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

Result bound(double value, double limit, const std::string& what) {
  return {value < limit, what + " = " + sci(value) + " (limit " + sci(limit) + ")"};
}

TorusPoint random_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  return d == 1 ? TorusPoint(u(rng)) : TorusPoint(u(rng), u(rng));
}

threebody::SolverOptions fast(int n) {
  threebody::SolverOptions o;
  o.n = n;
  o.reconstruct = false;
  o.check_monotone = false;
  return o;
}

Result dispersion_examples() {
  const double err = std::abs(dispersion(TorusPoint(0.0))) + std::abs(dispersion(TorusPoint(kPi)) - 4.0) +
                     std::abs(dispersion(TorusPoint(kPi / 2, kPi / 2)) - 4.0);
  return bound(err, 1e-14, "sum of errors");
}

Result two_body_closed_form() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> mu_d(-5.0, 5.0), k_d(-kPi, kPi);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    double mu = 0.0;
    while (mu == 0.0) mu = mu_d(rng);
    const double k = k_d(rng);
    const double c = std::cos(k / 2);
    const double exact = 4.0 - std::copysign(1.0, -mu) * std::sqrt(mu * mu + 16.0 * c * c);
    worst = std::max(worst, std::abs(twobody::bound_state_energy(mu, TorusPoint(k)).energy - exact));
  }
  return bound(worst, 1e-10, "max |e - closed form|");
}

Result two_body_duality(int d) {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) {
    const TorusPoint k = random_point(rng, d);
    const double mu = 0.25 + 0.3 * i;
    const double s = twobody::bound_state_energy(mu, k).energy + twobody::bound_state_energy(-mu, k).energy;
    worst = std::max(worst, std::abs(s - 8.0 * d));
  }
  return bound(worst, 1e-9, "max |e_mu + e_-mu - 8d|");
}

Result two_body_grid(int d) {
  const UniformGrid g(d, d == 1 ? 128 : 16);
  const double mu = -1.3;
  std::vector<double> e(g.size());
  bool side = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto sol = twobody::bound_state_energy(mu, g.node(i));
    e[i] = sol.energy;
    side = side && sol.edge_gap > 0.0 && sol.energy <= sol.ess.lo;
  }
  double odd = 0.0;
  bool minimum = true;
  const std::size_t origin = g.nearest(TorusPoint::zero(d));
  for (std::size_t i = 0; i < g.size(); ++i) {
    odd = std::max(odd, std::abs(e[i] - e[g.nearest(-g.node(i))]));
    if (i != origin && !(e[origin] < e[i])) minimum = false;
  }
  return {side && minimum && odd < 1e-9,
          "evenness " + sci(odd) + ", below E_min " + (side ? "yes" : "no") + ", strict minimum at 0 " +
              (minimum ? "yes" : "no")};
}

Result green_paths() {
  double worst = 0.0;
  for (double k : {0.0, 1.1, 2.9}) {
    for (double z : {-0.3, -2.0, 9.5}) {
      const TorusPoint p(k);
      const double a = twobody::greens_integral(p, z);
      worst = std::max(worst, std::abs(a - twobody::greens_integral_quadrature(p, z, 4096)) / std::abs(a));
    }
  }
  return bound(worst, 1e-10, "max relative difference");
}

Result lemma(int d) {
  std::mt19937_64 rng(107);
  double weakest = INFINITY;
  for (int i = 0; i < (d == 1 ? 10 : 5); ++i) {
    const TorusPoint K = random_point(rng, d);
    const auto lo = threebody::essential_spectrum(-1.0, K);
    const auto hi = threebody::essential_spectrum(1.0, K);
    weakest = std::min({weakest, lo.three_particle_band.lo - lo.tau_bottom, hi.tau_top - hi.three_particle_band.hi});
  }
  return {weakest > 1e-10, "smallest branch gap " + sci(weakest)};
}

Result bs_structure() {
  const TorusPoint K(0.4);
  const auto s = threebody::essential_spectrum(-1.0, K);
  double prev = 0.0;
  bool monotone = true;
  for (int i = 0; i < 8; ++i) {
    const double l = threebody::bs_lambda_max(threebody::bs_matrix(-1.0, K, s.tau_bottom - std::pow(10.0, 1.0 - 0.7 * i), 128, s)).value;
    monotone = monotone && l > prev;
    prev = l;
  }
  const auto top = threebody::bs_lambda_max(threebody::bs_matrix(-1.0, K, s.tau_bottom - 0.2, 128, s));
  const double neg = *std::min_element(top.vector.begin(), top.vector.end());
  return {monotone && neg > -1e-12, std::string("monotone ") + (monotone ? "yes" : "no") + ", min Perron entry " + sci(neg)};
}

Result three_body_vs_oracle() {
  threebody::SolverOptions opts;
  opts.n = 256;
  const auto sol = threebody::bound_state_energy(-2.0, TorusPoint(0.0), opts);
  const int Ls[] = {16, 32, 64};
  const auto orc = oracle::three_body_energy(-2.0, TorusPoint(0.0), Ls);
  const double diff = std::abs(sol.energy - orc.extrapolation.energy);
  const bool ok = diff < 1e-5 && sol.energy < sol.spectrum.tau_bottom && sol.eigenfunction.symmetry_residual < 1e-8 &&
                  sol.eigenfunction.schrodinger_residual < 1e-6;
  return {ok, "difference " + sci(diff) + ", symmetry " + sci(sol.eigenfunction.symmetry_residual) +
                  ", Schrodinger " + sci(sol.eigenfunction.schrodinger_residual)};
}

Result three_body_above() {
  const auto sol = threebody::bound_state_energy(2.0, TorusPoint(kPi / 2), fast(256));
  return {sol.energy > sol.spectrum.tau_top, "E - tau_t = " + sci(sol.energy - sol.spectrum.tau_top)};
}

Result wrong_side() {
  double worst = 0.0;
  for (double mu : {-2.0, 2.0}) {
    const TorusPoint K(0.0);
    const auto s = threebody::essential_spectrum(mu, K);
    for (double dist : {0.1, 1.0, 10.0}) {
      const double z = mu < 0.0 ? s.tau_top + dist : s.tau_bottom - dist;
      worst = std::max(worst, threebody::bs_lambda_max(threebody::bs_matrix(mu, K, z, 128, s)).value);
    }
  }
  const auto down = oracle::classify_spectrum(oracle::bosonic_three_body(-2.0, TorusPoint(0.0), 32));
  const auto up = oracle::classify_spectrum(oracle::bosonic_three_body(2.0, TorusPoint(0.0), 32));
  const std::size_t count = down.isolated_above.size() + up.isolated_below.size();
  return {worst < 1.0 && count == 0, "max lambda " + sci(worst) + ", wrong-side oracle levels " + std::to_string(count)};
}

Result fredholm_equivalence() {
  double worst = 0.0;
  for (double mu : {-2.0, 1.5}) {
    const TorusPoint K(0.8);
    const double a = threebody::bound_state_energy(mu, K, fast(128)).energy;
    worst = std::max(worst, std::abs(a - threebody::fredholm_root(mu, K, 128).energy));
  }
  return bound(worst, 1e-9, "max root difference");
}

Result three_body_duality() {
  double worst = 0.0;
  for (double k : {0.3, 2.2}) {
    const TorusPoint K(k);
    const double a = threebody::bound_state_energy(-1.2, K, fast(128)).energy;
    const double b = threebody::bound_state_energy(1.2, K + TorusPoint::pi_vector(1), fast(128)).energy;
    worst = std::max(worst, std::abs(a + b - 12.0));
  }
  return bound(worst, 1e-8, "max |E_mu + E_-mu(K + pi) - 12|");
}

Result finite_duality() {
  const int L = 16;
  const TorusPoint K(kTwoPi * 3 / L);
  const auto a = linalg::eigvalsh(oracle::finite_three_body(-1.7, K, L).matrix);
  auto b = linalg::eigvalsh(oracle::finite_three_body(1.7, K + TorusPoint::pi_vector(1), L).matrix);
  for (double& x : b) x = 12.0 - x;
  std::sort(b.begin(), b.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return bound(worst, 1e-10, "max sorted-spectrum difference");
}

Result edge_divergence() {
  const TorusPoint K(0.0);
  const auto s = threebody::essential_spectrum(-1.0, K);
  std::vector<double> zs;
  for (int m = 1; m <= 6; ++m) zs.push_back(s.tau_bottom - std::pow(10.0, -m));
  const auto v = threebody::edge_divergence_diagnostic(-1.0, K, zs);
  bool increasing = true;
  for (std::size_t i = 1; i < v.size(); ++i) increasing = increasing && v[i].value > v[i - 1].value;
  const double slope = threebody::log_log_slope(std::span(v).subspan(3), s.tau_bottom);
  return {increasing && std::abs(slope + 0.5) < 0.15,
          std::string("increasing ") + (increasing ? "yes" : "no") + ", slope " + format12(slope)};
}

Result isolated_band(int d) {
  const auto band = d == 1 ? threebody::band_scan(-10.0, 1, 16, 128) : threebody::band_scan(-10.0, 2, 4, 24);
  return {band.all_ok && band.isolated, "min gap " + sci(band.min_gap)};
}

Result three_body_d2(double mu) {
  const auto sol = threebody::bound_state_energy(mu, TorusPoint(0.0, 0.0), fast(32));
  const bool side = mu < 0.0 ? sol.energy < sol.spectrum.tau_bottom : sol.energy > sol.spectrum.tau_top;
  std::string detail = "distance to edge " + sci(sol.spectrum.distance(sol.energy));
  if (mu < 0.0) return {side, detail};
  const int Ls[] = {6, 8};
  const auto orc = oracle::three_body_energy(mu, TorusPoint(0.0, 0.0), Ls);
  const double diff = std::abs(sol.energy - orc.extrapolation.energy);
  return {side && diff < 5e-3, detail + ", oracle difference " + sci(diff)};
}

std::vector<Check> checks() {
  return {
      {"dispersion examples", 1, true, dispersion_examples},
      {"two-body closed form", 1, true, two_body_closed_form},
      {"two-body duality", 1, true, [] { return two_body_duality(1); }},
      {"two-body evenness and minimum", 1, true, [] { return two_body_grid(1); }},
      {"Green's function paths", 1, true, green_paths},
      {"channel branch below the free band", 1, false, [] { return lemma(1); }},
      {"Birman-Schwinger monotonicity and Perron vector", 1, false, bs_structure},
      {"three-body energy against the oracle", 1, false, three_body_vs_oracle},
      {"three-body state above tau_t", 1, false, three_body_above},
      {"no wrong-side bound state", 1, false, wrong_side},
      {"Fredholm and eigenvalue roots", 1, false, fredholm_equivalence},
      {"three-body duality", 1, false, three_body_duality},
      {"finite-volume duality", 1, false, finite_duality},
      {"edge divergence", 1, false, edge_divergence},
      {"isolated band", 1, false, [] { return isolated_band(1); }},
      {"two-body duality", 2, false, [] { return two_body_duality(2); }},
      {"two-body evenness and minimum", 2, false, [] { return two_body_grid(2); }},
      {"channel branch below the free band", 2, false, [] { return lemma(2); }},
      {"three-body state below tau_b", 2, false, [] { return three_body_d2(-2.0); }},
      {"three-body state above tau_t against the oracle", 2, false, [] { return three_body_d2(2.0); }},
      {"isolated band", 2, false, [] { return isolated_band(2); }},
  };
}

}  // namespace

Outcome cmd_selftest(const RunConfig& c) {
  Outcome o;
  Report& r = o.report;
  r.config = echo(c);
  r.columns = {"check", "d", "status", "detail", "seconds"};
  r.units["seconds"] = "s";
  int failed = 0, total = 0;
  for (const auto& check : checks()) {
    if (check.d > c.d || (c.quick && !check.quick)) continue;
    const auto start = std::chrono::steady_clock::now();
    Result res;
    try {
      res = check.run();
    } catch (const std::exception& e) {
      res = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.rows.push_back({check.name, static_cast<long long>(check.d), std::string(res.pass ? "PASS" : "FAIL"),
                      res.detail, std::round(secs * 100) / 100});
    ++total;
    if (!res.pass) ++failed;
  }
  r.summary.emplace_back("checks", static_cast<long long>(total));
  r.summary.emplace_back("failed", static_cast<long long>(failed));
  if (failed > 0) o.code = kExitInvariant;
  return o;
}

}  // namespace latbound::cli
