#pragma once

#include "config.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace molsim::cli {

struct Preset {
  std::string name;
  std::string figure;       // what the output reproduces
  std::string description;
  Json config;              // full config document
};

const std::vector<Preset>& presets();
std::optional<Preset> find_preset(std::string_view name);

}  // namespace molsim::cli
