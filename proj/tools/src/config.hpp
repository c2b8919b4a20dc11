#pragma once

// Scenario configuration: a versioned JSON document
//
//   {
//     "format_version": 1,
//     "scenario": "micromaser-sweep",
//     "name": "my-run",            (optional, names the output directory)
//     "output": "out/my-run",      (optional)
//     "workers": 2,                (optional)
//     "params": { ... }            (scenario specific, see scenarios.hpp)
//   }
//
// Unknown keys are errors at every level.

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace molsim::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kConfigDialect = "molsim-json/1";

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, int line = 0, int column = 0);

  const std::string& field() const { return field_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string field_;
  int line_;
  int column_;
};

enum class Scenario {
  micromaser_sweep,
  micromaser_phase,
  micromaser_distribution,
  passage_time,
  counting,
  momentum,
};

const char* to_string(Scenario s);
std::optional<Scenario> scenario_from_string(std::string_view name);
std::vector<std::string> scenario_names();

struct ScenarioConfig {
  Scenario scenario = Scenario::micromaser_sweep;
  std::string name;
  std::string output;
  unsigned workers = 1;
  Json params = Json::object();

  Json to_json() const;
};

/// Parses and structurally checks a config document. Syntax errors carry
/// line and column; structural errors carry the offending field path.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig config_from_json(const Json& doc);
ScenarioConfig load_config_file(const std::string& path);

/// "key=value". Keys that are not top-level fields address params; dots
/// descend into nested objects. The value is read as JSON when it parses,
/// otherwise as a plain string.
void apply_override(Json& doc, std::string_view assignment);

}  // namespace molsim::cli
