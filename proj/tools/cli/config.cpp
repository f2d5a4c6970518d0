#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "cli/cli.hpp"
#include "latbound/errors.hpp"

namespace latbound::cli {

namespace {

constexpr std::array<std::string_view, 14> kKeys = {
    "d", "mu", "k", "n", "nk", "L", "tol", "format", "out", "jobs", "oracle", "quick", "body", "config"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string canonical_key(std::string key) {
  if (key == "K") return "k";
  if (key == "nK" || key == "n_K" || key == "n_k") return "nk";
  return key;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    throw DomainError(key + ": '" + text + "' is not a finite number");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw DomainError(key + ": '" + text + "' is not an integer");
  }
  return v;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(trim(std::string_view(text).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::vector<int> parse_sizes(const std::string& key, std::string text) {
  text = trim(text);
  if (text.rfind("L=", 0) == 0) text = text.substr(2);
  std::vector<int> sizes;
  for (const auto& part : split(text)) {
    const int L = parse_int(key, part);
    if (L < 2) throw DomainError(key + ": lattice size " + part + " must be at least 2");
    sizes.push_back(L);
  }
  return sizes;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t.empty()) return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw DomainError(key + ": '" + text + "' is not a boolean");
}

}  // namespace

std::span<const std::string_view> known_keys() { return kKeys; }

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot open '" + path + "'");
  Settings s;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config: line " + std::to_string(number) + " of '" + path + "' is not key=value");
    }
    std::string key = canonical_key(trim(std::string_view(line).substr(0, eq)));
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end() || key == "config") {
      throw DomainError("config: unknown key '" + key + "' in '" + path + "'");
    }
    s[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return s;
}

RunConfig resolve(const std::string& command, const Settings& flags, const Settings& file) {
  Settings merged = file;
  for (const auto& [key, value] : flags) merged[canonical_key(key)] = value;

  RunConfig c;
  c.command = command;
  bool have_d = false;
  for (const auto& [key, value] : merged) {
    if (key == "d") {
      c.d = parse_int(key, value);
      have_d = true;
    } else if (key == "mu") {
      c.mu = parse_double(key, value);
    } else if (key == "k") {
      c.k.clear();
      for (const auto& part : split(value)) c.k.push_back(parse_double(key, part));
    } else if (key == "n") {
      c.n = parse_int(key, value);
    } else if (key == "nk") {
      c.nk = parse_int(key, value);
    } else if (key == "L") {
      c.L = parse_sizes(key, value);
    } else if (key == "tol") {
      c.tol = parse_double(key, value);
      if (!(c.tol > 0.0)) throw DomainError("tol: tolerance must be positive");
    } else if (key == "format") {
      if (value == "csv") {
        c.format = Format::csv;
      } else if (value == "json") {
        c.format = Format::json;
      } else {
        throw DomainError("format: expected csv or json, got '" + value + "'");
      }
    } else if (key == "out") {
      c.out = value;
    } else if (key == "jobs") {
      c.jobs = parse_int(key, value);
    } else if (key == "oracle") {
      c.oracle = parse_sizes(key, value);
    } else if (key == "quick") {
      c.quick = parse_bool(key, value);
    } else if (key == "body") {
      c.body = parse_int(key, value);
    } else if (key == "config") {
      c.config_file = value;
    } else {
      throw DomainError("unknown setting '" + key + "'");
    }
  }
  if (!have_d && !c.k.empty()) c.d = static_cast<int>(c.k.size());
  if (c.d != 1 && c.d != 2) throw DomainError("d: dimension must be 1 or 2");
  if (!c.k.empty() && static_cast<int>(c.k.size()) != c.d) {
    throw DomainError("k: expected " + std::to_string(c.d) + " components, got " +
                      std::to_string(c.k.size()));
  }
  if (c.n < 0 || (c.n > 0 && c.n < 2)) throw DomainError("n: nodes per axis must be at least 2");
  if (c.nk < 1) throw DomainError("nk: grid size must be positive");
  if (c.jobs < 1) throw DomainError("jobs: must be at least 1");
  if (c.body != 2 && c.body != 3) throw DomainError("body: must be 2 or 3");
  return c;
}

double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format12(x).c_str(), nullptr);
}

std::string format12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace latbound::cli
