#include "run.hpp"

#include "presets.hpp"
#include "scenarios.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <ostream>

#ifndef MOLSIM_VERSION
#define MOLSIM_VERSION "unknown"
#endif

namespace molsim::cli {

namespace fs = std::filesystem;

namespace {

// short names accepted on the command line
std::string canonical_key(std::string assignment) {
  static const std::pair<const char*, const char*> kAliases[] = {
      {"N", "n_pairs"},
      {"theta", "theta_over_pi"},
  };
  const auto eq = assignment.find('=');
  const auto key = assignment.substr(0, eq);
  for (const auto& [alias, real] : kAliases) {
    if (key == alias) return real + assignment.substr(eq);
  }
  return assignment;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

ResolvedTarget resolve_target(const std::string& target, const std::vector<std::string>& overrides) {
  Json doc;
  std::string source;
  if (auto preset = find_preset(target)) {
    doc = preset->config;
    source = "preset " + target;
  } else if (fs::is_regular_file(target)) {
    doc = load_config_file(target).to_json();
    source = "file " + target;
  } else {
    const std::string name = target == "passage" ? "passage-time" : target;
    if (!scenario_from_string(name)) {
      throw ConfigError("", fmt::format("'{}' is neither a preset, a config file nor a scenario "
                                        "(see 'molsim list')",
                                        target));
    }
    doc = Json{{"format_version", kFormatVersion}, {"scenario", name}};
    source = "scenario " + name;
  }
  for (const auto& o : overrides) apply_override(doc, canonical_key(o));
  ResolvedTarget out{config_from_json(doc), source};
  validate_params(out.config.scenario, out.config.params);
  return out;
}

RunReport run(const RunRequest& request, std::ostream& log) {
  RunReport report;
  const auto start = std::chrono::steady_clock::now();

  ResolvedTarget target;
  Json resolved_params;
  try {
    target = resolve_target(request.target, request.overrides);
    resolved_params = validate_params(target.config.scenario, target.config.params);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    report.exit_code = kExitConfig;
    return report;
  }
  ScenarioConfig& cfg = target.config;
  const unsigned workers = request.workers.value_or(cfg.workers);
  report.out_dir = request.out_dir ? fs::path(*request.out_dir)
                   : !cfg.output.empty() ? fs::path(cfg.output)
                                         : fs::path("molsim-out") / cfg.name;

  std::error_code ec;
  fs::create_directories(report.out_dir, ec);
  if (ec || !fs::is_directory(report.out_dir)) {
    log << "error: cannot create output directory " << report.out_dir << "\n";
    report.exit_code = kExitFailure;
    return report;
  }

  // the hash covers everything that determines the outputs; not the worker
  // count or the output location
  Json identity = cfg.to_json();
  identity.erase("output");
  identity.erase("workers");
  identity["params"] = resolved_params;
  const std::string config_hash = sha256_hex(identity.dump());

  log << fmt::format("running {} ({}) with {} worker(s) -> {}\n", cfg.name, to_string(cfg.scenario),
                     workers, report.out_dir.string());
  ScenarioResult result = run_scenario(cfg, workers);

  Json manifest = Json::object();
  manifest["format_version"] = kFormatVersion;
  manifest["config_dialect"] = kConfigDialect;
  manifest["toolkit"] = "molsim";
  manifest["version"] = MOLSIM_VERSION;
  manifest["scenario"] = to_string(cfg.scenario);
  manifest["name"] = cfg.name;
  manifest["source"] = target.source;
  manifest["config_sha256"] = config_hash;
  manifest["config"] = identity;
  manifest["workers"] = workers;

  Json outputs = Json::array();
  for (auto& table : result.tables) {
    std::vector<std::string> head{
        fmt::format("molsim {} | scenario {} | name {}", MOLSIM_VERSION, to_string(cfg.scenario),
                    cfg.name),
        "config_sha256 " + config_hash, "params " + resolved_params.dump()};
    table.comments.insert(table.comments.begin(), head.begin(), head.end());
    const std::string bytes = table.render();
    write_file(report.out_dir / table.file, bytes);
    outputs.push_back(Json{{"file", table.file},
                           {"sha256", sha256_hex(bytes)},
                           {"bytes", bytes.size()},
                           {"rows", table.rows.size()}});
  }
  manifest["outputs"] = outputs;

  std::size_t failed = 0;
  std::size_t unconverged = 0;
  Json points = Json::array();
  for (const auto& p : result.points) {
    failed += p.ok ? 0 : 1;
    unconverged += p.converged ? 0 : 1;
    Json j{{"key", p.key}, {"ok", p.ok}, {"converged", p.converged}};
    if (!p.error.empty()) j["error"] = p.error;
    points.push_back(std::move(j));
  }
  manifest["points"] = Json{{"total", result.points.size()},
                            {"failed", failed},
                            {"unconverged", unconverged},
                            {"detail", points}};
  manifest["summary"] = result.summary;
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest["wall_time_s"] = wall;
  write_file(report.out_dir / "manifest.json", manifest.dump(2) + "\n");
  report.manifest = std::move(manifest);

  for (const auto& p : result.points) {
    if (!p.ok) log << "point failed: " << p.key << ": " << p.error << "\n";
  }
  log << fmt::format("done in {:.1f} s: {} point(s), {} failed, {} not converged\n", wall,
                     result.points.size(), failed, unconverged);
  if (!result.points.empty() && failed == result.points.size()) {
    report.exit_code = kExitAllPointsFailed;
  }
  return report;
}

}  // namespace molsim::cli
