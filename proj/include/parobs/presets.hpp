#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace parobs::presets {

// Bundled exact-solution experiment configs.
std::vector<std::string> names();
bool has(const std::string& name);
std::string description(const std::string& name);
nlohmann::json config_json(const std::string& name);

} // namespace parobs::presets
