#pragma once

#include <nlohmann/json.hpp>

#include <string_view>

namespace homog {

/// Parses the TOML subset used by problem files into a JSON tree:
/// tables, dotted keys, strings, integers, floats, booleans, nested arrays
/// and inline tables. Arrays of tables and date-times are rejected.
/// Throws ParseError; the position is the 1-based line number.
nlohmann::json parse_toml(std::string_view text);

}  // namespace homog
