#include <cmath>
#include <ostream>

#include "cli/cli.hpp"

namespace latbound::cli {

namespace {

nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
          return round12(v);
        } else {
          return v;
        }
      },
      c);
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format12(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, long long>) {
          return std::to_string(v);
        } else {
          return quote(v);
        }
      },
      c);
}

// One line per config entry; nested values are dumped compactly.
std::string echo_value(const nlohmann::ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

nlohmann::ordered_json to_json(const Report& report) {
  nlohmann::ordered_json j;
  j["config"] = report.config;
  nlohmann::ordered_json units = nlohmann::ordered_json::object();
  for (const auto& col : report.columns) {
    const auto it = report.units.find(col);
    if (it != report.units.end()) units[col] = it->second;
  }
  j["units"] = units;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    for (std::size_t c = 0; c < report.columns.size(); ++c) r[report.columns[c]] = cell_json(row[c]);
    rows.push_back(std::move(r));
  }
  j["results"] = std::move(rows);
  nlohmann::ordered_json diag = report.diagnostics;
  if (!report.summary.empty()) {
    nlohmann::ordered_json summary;
    for (const auto& [key, value] : report.summary) summary[key] = cell_json(value);
    diag["summary"] = std::move(summary);
  }
  j["diagnostics"] = std::move(diag);
  return j;
}

void write_json(const Report& report, std::ostream& os) { os << to_json(report).dump(2) << '\n'; }

void write_csv(const Report& report, std::ostream& os) {
  for (const auto& [key, value] : report.config.items()) os << "# " << key << '=' << echo_value(value) << '\n';
  for (std::size_t c = 0; c < report.columns.size(); ++c) os << (c ? "," : "") << report.columns[c];
  os << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << cell_text(row[c]);
    os << '\n';
  }
  for (const auto& [key, value] : report.summary) os << "# " << key << ": " << cell_text(value) << '\n';
}

}  // namespace latbound::cli
