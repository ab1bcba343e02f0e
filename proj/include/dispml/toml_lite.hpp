#ifndef DISPML_TOML_LITE_HPP
#define DISPML_TOML_LITE_HPP

#include <string>

#include "json.hpp"

namespace dispml {

/// Minimal TOML-subset reader producing a JSON tree. Supported: comments,
/// [dotted.table] headers, key = value with strings, booleans, integers,
/// floats, arrays (may span lines), and inline tables. Arrays of tables
/// ([[name]]) are not supported; use an inline array of inline tables.
/// Throws ConfigError on malformed input.
nlohmann::json parse_toml_lite(const std::string& text);

/// Load a config file as a JSON tree; dispatches on the .json / .toml
/// extension (anything else is parsed as TOML).
nlohmann::json load_config_file(const std::string& path);

}  // namespace dispml

#endif
