#include "config.hpp"
#include "presets.hpp"
#include "run.hpp"
#include "scenarios.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

using namespace molsim::cli;

namespace {

// "--N 500 --fraction 0.05" after the target become overrides
std::vector<std::string> extras_to_overrides(const std::vector<std::string>& extras) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const auto& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() == 2) {
      throw ConfigError("", "unexpected argument '" + a + "'");
    }
    const auto body = a.substr(2);
    if (body.find('=') != std::string::npos) {
      out.push_back(body);
    } else if (i + 1 < extras.size()) {
      out.push_back(body + "=" + extras[++i]);
    } else {
      throw ConfigError("", "missing value for '" + a + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"molsim: molecule-formation quantum optics simulations"};
  app.require_subcommand(1);

  RunRequest request;
  std::string out_dir;
  unsigned workers = 0;
  auto* run_cmd = app.add_subcommand("run", "run a preset, a config file or a scenario");
  run_cmd->add_option("target", request.target, "preset name, config path or scenario")->required();
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 256));
  run_cmd->add_option("--override", request.overrides, "key=value (repeatable)");
  run_cmd->allow_extras();

  auto* list_cmd = app.add_subcommand("list", "list figure presets");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check a config file without running it");
  validate_cmd->add_option("config", validate_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*list_cmd) {
      std::cout << fmt::format("{:<16} {:<16} {}\n", "preset", "figure", "description");
      for (const auto& p : presets()) {
        std::cout << fmt::format("{:<16} {:<16} {}\n", p.name, p.figure, p.description);
      }
      return kExitOk;
    }
    if (*validate_cmd) {
      const auto cfg = load_config_file(validate_path);
      const auto resolved = validate_params(cfg.scenario, cfg.params);
      std::cout << fmt::format("ok: {} ({})\n", cfg.name, to_string(cfg.scenario));
      std::cout << resolved.dump(2) << "\n";
      return kExitOk;
    }
    if (!out_dir.empty()) request.out_dir = out_dir;
    if (workers > 0) request.workers = workers;
    for (auto& o : extras_to_overrides(run_cmd->remaining())) request.overrides.push_back(o);
    return run(request, std::cerr).exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
