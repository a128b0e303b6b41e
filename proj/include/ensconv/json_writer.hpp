#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace ensconv {

/// Pretty-prints with two-space indentation. Floating-point numbers are written
/// with 17 significant digits ("%.17g"); NaN and infinities become null.
void write_json(std::ostream& out, const nlohmann::ordered_json& value);
std::string to_json_string(const nlohmann::ordered_json& value);

std::string format_real(double value);

}  // namespace ensconv
