#include "config.hpp"

#include <fmt/format.h>

#include <array>
#include <fstream>
#include <sstream>
#include <utility>

namespace molsim::cli {

namespace {

constexpr std::array<std::pair<Scenario, const char*>, 6> kScenarios{{
    {Scenario::micromaser_sweep, "micromaser-sweep"},
    {Scenario::micromaser_phase, "micromaser-phase"},
    {Scenario::micromaser_distribution, "micromaser-distribution"},
    {Scenario::passage_time, "passage-time"},
    {Scenario::counting, "counting"},
    {Scenario::momentum, "momentum"},
}};

constexpr std::array<const char*, 6> kTopLevel{"format_version", "scenario", "name",
                                               "output",         "workers",  "params"};

bool is_top_level(std::string_view key) {
  for (const char* k : kTopLevel) {
    if (key == k) return true;
  }
  return false;
}

std::string format_message(const std::string& field, const std::string& message, int line,
                           int column) {
  std::string out;
  if (line > 0) out += fmt::format("line {}, column {}: ", line, column);
  if (!field.empty()) out += field + ": ";
  return out + message;
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message, int line, int column)
    : std::runtime_error(format_message(field, message, line, column)),
      field_(std::move(field)),
      line_(line),
      column_(column) {}

const char* to_string(Scenario s) {
  for (const auto& [value, name] : kScenarios) {
    if (value == s) return name;
  }
  return "?";
}

std::optional<Scenario> scenario_from_string(std::string_view name) {
  for (const auto& [value, n] : kScenarios) {
    if (name == n) return value;
  }
  return std::nullopt;
}

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& entry : kScenarios) out.emplace_back(entry.second);
  return out;
}

Json ScenarioConfig::to_json() const {
  Json j = Json::object();
  j["format_version"] = kFormatVersion;
  j["scenario"] = to_string(scenario);
  j["name"] = name;
  if (!output.empty()) j["output"] = output;
  j["workers"] = workers;
  j["params"] = params;
  return j;
}

ScenarioConfig config_from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!is_top_level(key)) throw ConfigError(key, "unknown key");
  }

  if (!doc.contains("format_version")) throw ConfigError("format_version", "missing");
  const Json& version = doc["format_version"];
  if (!version.is_number_integer() || version.get<long>() != kFormatVersion) {
    throw ConfigError("format_version", fmt::format("unsupported (expected {})", kFormatVersion));
  }

  ScenarioConfig cfg;
  if (!doc.contains("scenario") || !doc["scenario"].is_string()) {
    throw ConfigError("scenario", "missing or not a string");
  }
  const auto name = doc["scenario"].get<std::string>();
  const auto scenario = scenario_from_string(name);
  if (!scenario) {
    std::string known;
    for (const auto& s : scenario_names()) known += (known.empty() ? "" : ", ") + s;
    throw ConfigError("scenario", fmt::format("unknown scenario '{}' (known: {})", name, known));
  }
  cfg.scenario = *scenario;
  cfg.name = name;

  if (doc.contains("name")) {
    if (!doc["name"].is_string() || doc["name"].get<std::string>().empty()) {
      throw ConfigError("name", "must be a non-empty string");
    }
    cfg.name = doc["name"].get<std::string>();
  }
  if (cfg.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("name", "must not contain path separators");
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("output", "must be a string");
    cfg.output = doc["output"].get<std::string>();
  }
  if (doc.contains("workers")) {
    const Json& w = doc["workers"];
    if (!w.is_number_integer() || w.get<long>() < 1 || w.get<long>() > 256) {
      throw ConfigError("workers", "must be an integer in [1, 256]");
    }
    cfg.workers = w.get<unsigned>();
  }
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) throw ConfigError("params", "must be an object");
    cfg.params = doc["params"];
  }
  return cfg;
}

ScenarioConfig parse_config(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/false);
  } catch (const Json::parse_error& e) {
    // byte is one past the offending character
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ConfigError("", what, line, col);
  }
  return config_from_json(doc);
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(Json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("--override", fmt::format("expected key=value, got '{}'", assignment));
  }
  std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));

  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }

  std::vector<std::string> path;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    path.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const auto& part : path) {
    if (part.empty()) throw ConfigError("--override", fmt::format("malformed key '{}'", key));
  }
  if (!is_top_level(path.front())) path.insert(path.begin(), "params");

  Json* node = &doc;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    Json& next = (*node)[path[i]];
    if (next.is_null()) next = Json::object();
    if (!next.is_object()) {
      throw ConfigError("--override", fmt::format("'{}' is not an object", path[i]));
    }
    node = &next;
  }
  (*node)[path.back()] = std::move(value);
}

}  // namespace molsim::cli
