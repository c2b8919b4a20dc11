#pragma once

#include "config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace molsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAllPointsFailed = 3;

struct ResolvedTarget {
  ScenarioConfig config;
  std::string source;  // "preset fig-II4", "file path", "scenario passage-time"
};

/// A preset name, a config file path, or a bare scenario name (run with
/// defaults), followed by the overrides in order. Throws ConfigError.
ResolvedTarget resolve_target(const std::string& target,
                              const std::vector<std::string>& overrides = {});

struct RunRequest {
  std::string target;
  std::optional<std::string> out_dir;
  std::optional<unsigned> workers;
  std::vector<std::string> overrides;
};

struct RunReport {
  int exit_code = kExitOk;
  std::filesystem::path out_dir;
  Json manifest;
};

/// Validates, runs, writes the CSVs and then manifest.json. Config errors are
/// reported on `log` and mapped to exit code 2.
RunReport run(const RunRequest& request, std::ostream& log);

std::string sha256_hex(std::string_view bytes);

}  // namespace molsim::cli
