#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

namespace raterkit::config {

/// Parses the TOML subset used for run configs: [section] and [a.b] headers,
/// key = value pairs, basic and literal strings, integers, floats, booleans,
/// and arrays (which may span lines). Comments start with '#'.
nlohmann::json parse_toml(std::string_view text);

/// Reads a config file; JSON when the content starts with '{', TOML otherwise.
nlohmann::json load(const std::filesystem::path& path);

}  // namespace raterkit::config
