#include "ensconv/json_writer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace ensconv {

namespace {

void write_value(std::ostream& out, const nlohmann::ordered_json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << nlohmann::json(it.key()).dump() << ": ";
        write_value(out, it.value(), indent + 2);
      }
      out << "\n" << close << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out << ",\n";
        first = false;
        out << pad;
        write_value(out, item, indent + 2);
      }
      out << "\n" << close << "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out << format_real(v.get<double>());
      return;
    default:
      out << v.dump();
  }
}

}  // namespace

std::string format_real(double value) {
  if (!std::isfinite(value)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_json(std::ostream& out, const nlohmann::ordered_json& value) {
  write_value(out, value, 0);
  out << "\n";
}

std::string to_json_string(const nlohmann::ordered_json& value) {
  std::ostringstream out;
  write_json(out, value);
  return out.str();
}

}  // namespace ensconv
