#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace skeladv {

/// Decimal text with 17 significant digits; parses back to the identical double.
std::string format_double(double v);

/// Serializes `doc` like `dump(indent)` but writes every floating-point value with 17
/// significant digits.
std::string dump_json17(const nlohmann::json& doc, int indent = 1);

}  // namespace skeladv
