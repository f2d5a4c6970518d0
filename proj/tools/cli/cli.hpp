#pragma once

// Command-line front end. Every subcommand builds a Report, which is written
// as CSV or JSON; `run` maps library errors onto exit codes.

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace latbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitConvergence = 3;

enum class Format { csv, json };

struct RunConfig {
  std::string command;
  int d = 1;
  std::optional<double> mu;
  /// Quasimomentum k or K; empty means the origin.
  std::vector<double> k;
  /// Nystrom nodes per axis (three-body) or branch grid (ess); 0 = default.
  int n = 0;
  int nk = 16;
  /// Oracle lattice sizes for the oracle subcommand.
  std::vector<int> L;
  /// Root tolerance; 0 = solver default.
  double tol = 0.0;
  Format format = Format::csv;
  std::string out;
  int jobs = 1;
  /// Lattice sizes for the --oracle comparison of threebody.
  std::vector<int> oracle;
  bool quick = false;
  int body = 3;
  std::string config_file;
};

/// Raw key=value settings, from flags or a config file.
using Settings = std::map<std::string, std::string>;

/// Keys accepted in config files and as flags.
std::span<const std::string_view> known_keys();

/// Parses a key=value file; '#' starts a comment. Throws DomainError on
/// malformed lines or unknown keys.
Settings read_config_file(const std::string& path);

/// Converts settings into a RunConfig. `flags` take precedence over `file`.
RunConfig resolve(const std::string& command, const Settings& flags, const Settings& file);

/// Value rounded to 12 significant digits.
double round12(double x);
std::string format12(double x);

using Cell = std::variant<double, long long, bool, std::string>;

struct Report {
  nlohmann::ordered_json config;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Column name to unit.
  std::map<std::string, std::string> units;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
  /// Written as trailing "# key: value" lines in CSV and into diagnostics in JSON.
  std::vector<std::pair<std::string, Cell>> summary;
};

void write_csv(const Report& report, std::ostream& os);
void write_json(const Report& report, std::ostream& os);
nlohmann::ordered_json to_json(const Report& report);

/// Error carrying the exit code and the failing op in its message.
class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

struct Outcome {
  Report report;
  int code = kExitOk;
};

Outcome cmd_two_body(const RunConfig& config);
Outcome cmd_three_body(const RunConfig& config);
Outcome cmd_ess(const RunConfig& config);
Outcome cmd_band(const RunConfig& config);
Outcome cmd_oracle(const RunConfig& config);
Outcome cmd_selftest(const RunConfig& config);

nlohmann::ordered_json echo(const RunConfig& config);

/// Full entry point: parses args (without the program name), runs the
/// subcommand and writes output. Returns the exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace latbound::cli
