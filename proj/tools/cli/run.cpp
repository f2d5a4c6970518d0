#include <fstream>
#include <functional>
#include <ostream>

#include "CLI11.hpp"
#include "cli/cli.hpp"
#include "latbound/errors.hpp"

namespace latbound::cli {

namespace {

struct Subcommand {
  const char* name;
  const char* help;
  std::vector<std::string> keys;
  std::function<Outcome(const RunConfig&)> fn;
};

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> table = {
      {"twobody", "Two-boson bound state e_mu(k)", {"d", "mu", "k", "tol"}, cmd_two_body},
      {"threebody", "Three-boson bound state E_mu(K)", {"d", "mu", "k", "n", "tol", "oracle"}, cmd_three_body},
      {"ess", "Essential spectrum of a fiber", {"d", "mu", "k", "n", "body"}, cmd_ess},
      {"band", "Bound-state energies over a quasimomentum grid", {"d", "mu", "nk", "n", "body", "jobs"}, cmd_band},
      {"oracle", "Finite-volume exact diagonalization", {"d", "mu", "k", "L", "body"}, cmd_oracle},
      {"selftest", "Invariant suite", {"d", "quick"}, cmd_selftest},
  };
  return table;
}

const std::map<std::string, std::string>& option_help() {
  static const std::map<std::string, std::string> help = {
      {"d", "Dimension, 1 or 2"},
      {"mu", "Coupling constant"},
      {"k", "Quasimomentum, comma-separated radians"},
      {"n", "Nodes per axis (Nystrom grid or channel branch grid)"},
      {"nk", "Quasimomentum grid points per axis"},
      {"L", "Oracle lattice sizes, e.g. 32,64,128"},
      {"tol", "Root tolerance"},
      {"body", "Particle number, 2 or 3"},
      {"jobs", "Worker threads"},
      {"oracle", "Compare with the oracle at these sizes, e.g. L=32,64,128"},
  };
  return help;
}

void emit(const Report& report, const RunConfig& config, std::ostream& out) {
  const auto write = [&](std::ostream& os) {
    if (config.format == Format::json) {
      write_json(report, os);
    } else {
      write_csv(report, os);
    }
  };
  if (config.out.empty()) {
    write(out);
    return;
  }
  std::ofstream file(config.out, std::ios::binary);
  if (!file) throw CommandError(kExitDomain, "output: cannot open '" + config.out + "'");
  write(file);
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bound states of two and three bosons on the lattice torus", "latbound"};
  app.require_subcommand(1);

  std::map<std::string, std::optional<std::string>> raw;
  bool quick = false;
  std::string format, out_path, config_path;
  std::map<const CLI::App*, const Subcommand*> lookup;
  for (const auto& sc : subcommands()) {
    CLI::App* sub = app.add_subcommand(sc.name, sc.help);
    lookup[sub] = &sc;
    for (const auto& key : sc.keys) {
      if (key == "quick") {
        sub->add_flag("--quick", quick, "Closed-form checks only");
      } else if (key == "k") {
        sub->add_option("--k,--K", raw["k"], option_help().at("k"));
      } else {
        sub->add_option("--" + key, raw[key], option_help().at(key));
      }
    }
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", out_path, "Output path (default stdout)");
    sub->add_option("--config", config_path, "key=value file; flags take precedence");
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDomain;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const Subcommand& sc = *lookup.at(chosen);
  try {
    Settings flags;
    for (const auto& key : sc.keys) {
      const auto it = raw.find(key);
      if (it != raw.end() && it->second) flags[key] = *it->second;
    }
    if (quick) flags["quick"] = "true";
    if (!format.empty()) flags["format"] = format;
    if (!out_path.empty()) flags["out"] = out_path;
    Settings file;
    if (!config_path.empty()) {
      // Keys meant for other subcommands are ignored.
      for (auto& [key, value] : read_config_file(config_path)) {
        const bool common = key == "format" || key == "out";
        if (common || std::find(sc.keys.begin(), sc.keys.end(), key) != sc.keys.end()) file[key] = value;
      }
    }
    RunConfig config = resolve(sc.name, flags, file);
    Outcome outcome = sc.fn(config);
    emit(outcome.report, config, out);
    return outcome.code;
  } catch (const CommandError& e) {
    err << "latbound " << sc.name << ": " << e.what() << '\n';
    return e.code();
  } catch (const DomainError& e) {
    err << "latbound " << sc.name << ": " << e.what() << '\n';
    return kExitDomain;
  } catch (const Error& e) {
    err << "latbound " << sc.name << ": " << e.what() << '\n';
    return kExitConvergence;
  }
}

}  // namespace latbound::cli
