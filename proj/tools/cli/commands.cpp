#include <cmath>
#include <string>

#include "cli/cli.hpp"
#include "latbound/errors.hpp"
#include "latbound/oracle.hpp"
#include "latbound/threebody.hpp"
#include "latbound/twobody.hpp"

namespace latbound::cli {

namespace {

const char* kEnergy = "energy (hopping = 1)";
const char* kMomentum = "rad";
const char* kPure = "dimensionless";
const char* kCount = "count";

template <class F>
auto guarded(const std::string& op, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw CommandError(kExitDomain, op + ": " + e.what());
  } catch (const Error& e) {
    throw CommandError(kExitConvergence, op + ": " + e.what());
  }
}

double require_mu(const RunConfig& c) {
  if (!c.mu) throw CommandError(kExitDomain, c.command + ": --mu is required");
  return *c.mu;
}

TorusPoint quasimomentum(const RunConfig& c) {
  if (c.k.empty()) return TorusPoint::zero(c.d);
  return TorusPoint::from_coords(c.k);
}

void add_momentum_columns(Report& r, const std::string& name, int d) {
  for (int i = 1; i <= d; ++i) {
    r.columns.push_back(name + "_" + std::to_string(i));
    r.units[r.columns.back()] = kMomentum;
  }
}

void push_momentum(std::vector<Cell>& row, const TorusPoint& p) {
  for (double x : p.coords()) row.emplace_back(x);
}

void add_columns(Report& r, std::initializer_list<std::pair<const char*, const char*>> cols) {
  for (const auto& [name, unit] : cols) {
    r.columns.emplace_back(name);
    r.units[name] = unit;
  }
}

nlohmann::ordered_json momentum_json(const TorusPoint& p) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (double x : p.coords()) a.push_back(round12(x));
  return a;
}

std::vector<int> default_oracle_sizes(int body, int d) {
  if (body == 3 && d == 2) return {6, 8};
  return {32, 64, 128};
}

nlohmann::ordered_json sizes_json(const std::vector<int>& L) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (int x : L) a.push_back(x);
  return a;
}

Report base_report(const RunConfig& c) {
  Report r;
  r.config = echo(c);
  return r;
}

}  // namespace

nlohmann::ordered_json echo(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = c.command;
  j["d"] = c.d;
  if (c.mu) {
    j["mu"] = round12(*c.mu);
  } else {
    j["mu"] = nullptr;
  }
  j["k"] = momentum_json(c.k.empty() ? TorusPoint::zero(c.d) : TorusPoint::from_coords(c.k));
  j["n"] = c.n;
  j["nk"] = c.nk;
  j["L"] = sizes_json(c.L);
  j["tol"] = c.tol;
  j["format"] = c.format == Format::csv ? "csv" : "json";
  j["jobs"] = c.jobs;
  j["oracle"] = sizes_json(c.oracle);
  j["quick"] = c.quick;
  j["body"] = c.body;
  return j;
}

Outcome cmd_two_body(const RunConfig& c) {
  const double mu = require_mu(c);
  const TorusPoint k = guarded("twobody.quasimomentum", [&] { return quasimomentum(c); });
  twobody::SolverOptions opts;
  opts.tol = c.tol;
  opts.sample_n = -1;
  const auto sol = guarded("twobody.bound_state_energy", [&] { return twobody::bound_state_energy(mu, k, opts); });

  Outcome o{base_report(c)};
  Report& r = o.report;
  add_momentum_columns(r, "k", c.d);
  add_columns(r, {{"energy", kEnergy},
                  {"E_min", kEnergy},
                  {"E_max", kEnergy},
                  {"edge_gap", kEnergy},
                  {"side", ""},
                  {"residual", kPure},
                  {"iterations", kCount}});
  std::vector<Cell> row;
  push_momentum(row, k);
  row.emplace_back(sol.energy);
  row.emplace_back(sol.ess.lo);
  row.emplace_back(sol.ess.hi);
  row.emplace_back(sol.edge_gap);
  row.emplace_back(std::string(sol.side == twobody::Side::below ? "below" : "above"));
  row.emplace_back(sol.residual);
  row.emplace_back(static_cast<long long>(sol.iterations));
  r.rows.push_back(std::move(row));

  // In d = 2 the energy can round onto the edge; edge_gap carries the distance.
  const bool strict = sol.edge_gap > 0.0 && (mu < 0.0 ? sol.energy <= sol.ess.lo : sol.energy >= sol.ess.hi);
  r.summary.emplace_back("bound_side", strict);
  if (!strict) o.code = kExitInvariant;
  return o;
}

Outcome cmd_three_body(const RunConfig& c) {
  const double mu = require_mu(c);
  const TorusPoint K = guarded("threebody.quasimomentum", [&] { return quasimomentum(c); });
  threebody::SolverOptions opts;
  opts.n = c.n;
  if (c.tol > 0.0) opts.tol = c.tol;
  const auto sol = guarded("threebody.bound_state_energy", [&] { return threebody::bound_state_energy(mu, K, opts); });
  const auto& s = sol.spectrum;

  Outcome o{base_report(c)};
  Report& r = o.report;
  r.config["n"] = sol.n;
  add_momentum_columns(r, "K", c.d);
  add_columns(r, {{"energy", kEnergy},
                  {"tau_b", kEnergy},
                  {"tau_t", kEnergy},
                  {"branch_lo", kEnergy},
                  {"branch_hi", kEnergy},
                  {"E_min", kEnergy},
                  {"E_max", kEnergy},
                  {"gap", kEnergy},
                  {"lambda", kPure},
                  {"residual", kPure},
                  {"symmetry_residual", kPure},
                  {"schrodinger_residual", kPure},
                  {"iterations", kCount}});
  std::vector<Cell> row;
  push_momentum(row, K);
  for (double v : {sol.energy, s.tau_bottom, s.tau_top, s.two_particle_branch.lo, s.two_particle_branch.hi,
                   s.three_particle_band.lo, s.three_particle_band.hi, s.distance(sol.energy), sol.lambda,
                   sol.residual, sol.eigenfunction.symmetry_residual, sol.eigenfunction.schrodinger_residual}) {
    row.emplace_back(v);
  }
  row.emplace_back(static_cast<long long>(sol.iterations));

  nlohmann::ordered_json mono = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < sol.monotone_z.size(); ++i) {
    mono.push_back({{"z", round12(sol.monotone_z[i])}, {"lambda", round12(sol.monotone_lambda[i])}});
  }
  r.diagnostics["lambda_samples"] = std::move(mono);
  r.diagnostics["threshold_momentum"] = momentum_json(s.threshold_momentum);

  const bool side = mu < 0.0 ? sol.energy < s.tau_bottom : sol.energy > s.tau_top;
  const bool symmetric = sol.eigenfunction.symmetry_residual < 1e-8;
  if (!c.oracle.empty()) {
    const auto orc = guarded("oracle.three_body_energy", [&] { return oracle::three_body_energy(mu, K, c.oracle); });
    add_columns(r, {{"oracle_energy", kEnergy}, {"oracle_error", kEnergy}, {"oracle_difference", kEnergy}});
    row.emplace_back(orc.extrapolation.energy);
    row.emplace_back(orc.extrapolation.error);
    row.emplace_back(sol.energy - orc.extrapolation.energy);
    nlohmann::ordered_json per_l = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < orc.L.size(); ++i) {
      const auto& rep = orc.reports[i];
      per_l.push_back({{"L", orc.L[i]},
                       {"energy", round12(orc.energies[i])},
                       {"isolated_wrong_side", mu < 0.0 ? rep.isolated_above.size() : rep.isolated_below.size()}});
    }
    r.diagnostics["oracle"] = {{"L", sizes_json(orc.L)},
                               {"per_size", std::move(per_l)},
                               {"exponent", round12(orc.extrapolation.exponent)},
                               {"extrapolated", orc.extrapolation.extrapolated},
                               {"warning", orc.extrapolation.warning}};
  }
  r.rows.push_back(std::move(row));
  r.summary.emplace_back("side", std::string(mu < 0.0 ? "below tau_b" : "above tau_t"));
  r.summary.emplace_back("bound_side", side);
  r.summary.emplace_back("monotone", sol.monotone);
  r.summary.emplace_back("single_signed", sol.eigenfunction.single_signed);
  if (!side || !sol.monotone || !symmetric) o.code = kExitInvariant;
  return o;
}

Outcome cmd_ess(const RunConfig& c) {
  const TorusPoint K = guarded("ess.quasimomentum", [&] { return quasimomentum(c); });
  Outcome o{base_report(c)};
  Report& r = o.report;
  if (c.body == 2) {
    const auto e = guarded("ess.band_edges", [&] { return twobody::band_edges(K); });
    add_momentum_columns(r, "k", c.d);
    add_columns(r, {{"E_min", kEnergy}, {"E_max", kEnergy}});
    std::vector<Cell> row;
    push_momentum(row, K);
    row.emplace_back(e.lo);
    row.emplace_back(e.hi);
    r.rows.push_back(std::move(row));
    return o;
  }
  const double mu = require_mu(c);
  const auto s = guarded("threebody.essential_spectrum", [&] { return threebody::essential_spectrum(mu, K, c.n); });
  add_momentum_columns(r, "K", c.d);
  add_columns(r, {{"tau_b", kEnergy},
                  {"tau_t", kEnergy},
                  {"branch_lo", kEnergy},
                  {"branch_hi", kEnergy},
                  {"E_min", kEnergy},
                  {"E_max", kEnergy}});
  add_momentum_columns(r, "threshold", c.d);
  std::vector<Cell> row;
  push_momentum(row, K);
  for (double v : {s.tau_bottom, s.tau_top, s.two_particle_branch.lo, s.two_particle_branch.hi,
                   s.three_particle_band.lo, s.three_particle_band.hi}) {
    row.emplace_back(v);
  }
  push_momentum(row, s.threshold_momentum);
  r.rows.push_back(std::move(row));
  const double gap = mu < 0.0 ? s.three_particle_band.lo - s.tau_bottom : s.tau_top - s.three_particle_band.hi;
  r.summary.emplace_back("branch_gap", gap);
  return o;
}

Outcome cmd_band(const RunConfig& c) {
  const double mu = require_mu(c);
  const BandReport band =
      c.body == 2 ? guarded("twobody.band_scan", [&] { return twobody::band_scan(mu, c.d, c.nk, c.jobs); })
                  : guarded("threebody.band_scan", [&] { return threebody::band_scan(mu, c.d, c.nk, c.n, c.jobs); });
  Outcome o{base_report(c)};
  Report& r = o.report;
  if (c.body == 3) r.config["n"] = band.n;
  add_momentum_columns(r, "K", c.d);
  add_columns(r, {{"energy", kEnergy},
                  {"tau_b", kEnergy},
                  {"tau_t", kEnergy},
                  {"E_min", kEnergy},
                  {"E_max", kEnergy},
                  {"gap", kEnergy},
                  {"status", ""}});
  for (const auto& b : band.rows) {
    std::vector<Cell> row;
    push_momentum(row, b.quasimomentum);
    const double nan = std::nan("");
    for (double v : {b.energy, b.tau_bottom, b.tau_top, b.free_band.lo, b.free_band.hi, b.gap}) {
      row.emplace_back(b.ok ? v : nan);
    }
    row.emplace_back(b.status);
    r.rows.push_back(std::move(row));
  }
  r.summary.emplace_back("rows", static_cast<long long>(band.rows.size()));
  r.summary.emplace_back("all_ok", band.all_ok);
  r.summary.emplace_back("band_lo", band.band.lo);
  r.summary.emplace_back("band_hi", band.band.hi);
  r.summary.emplace_back("min_gap", band.min_gap);
  r.summary.emplace_back("isolated", band.isolated);
  if (!band.all_ok) o.code = kExitConvergence;
  return o;
}

Outcome cmd_oracle(const RunConfig& c) {
  const double mu = require_mu(c);
  const TorusPoint K = guarded("oracle.quasimomentum", [&] { return quasimomentum(c); });
  const std::vector<int> L = c.L.empty() ? default_oracle_sizes(c.body, c.d) : c.L;
  Outcome o{base_report(c)};
  Report& r = o.report;
  r.config["L"] = sizes_json(L);
  r.columns.emplace_back("L");
  r.units["L"] = "sites per axis";
  add_columns(r, {{"energy", kEnergy}});
  oracle::Extrapolation ex;
  if (c.body == 2) {
    const auto res = guarded("oracle.two_body_energy", [&] { return oracle::two_body_energy(mu, K, L); });
    for (std::size_t i = 0; i < res.L.size(); ++i) r.rows.push_back({static_cast<long long>(res.L[i]), res.energies[i]});
    ex = res.extrapolation;
  } else {
    const auto res = guarded("oracle.three_body_energy", [&] { return oracle::three_body_energy(mu, K, L); });
    add_columns(r, {{"cluster_lo", kEnergy},
                    {"cluster_hi", kEnergy},
                    {"spacing_below", kEnergy},
                    {"spacing_above", kEnergy},
                    {"isolated_below", kCount},
                    {"isolated_above", kCount}});
    for (std::size_t i = 0; i < res.L.size(); ++i) {
      const auto& rep = res.reports[i];
      r.rows.push_back({static_cast<long long>(res.L[i]), res.energies[i], rep.cluster.lo, rep.cluster.hi,
                        rep.spacing_below, rep.spacing_above, static_cast<long long>(rep.isolated_below.size()),
                        static_cast<long long>(rep.isolated_above.size())});
    }
    ex = res.extrapolation;
  }
  r.summary.emplace_back("energy", ex.energy);
  r.summary.emplace_back("error", ex.error);
  r.summary.emplace_back("exponent", ex.exponent);
  r.summary.emplace_back("extrapolated", ex.extrapolated);
  if (!ex.warning.empty()) r.summary.emplace_back("warning", ex.warning);
  return o;
}

}  // namespace latbound::cli
