#include "skeladv/textio.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace skeladv {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write(std::ostringstream& os, const nlohmann::json& j, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        os << nlohmann::json(it.key()).dump() << (indent < 0 ? ":" : ": ");
        write(os, it.value(), indent, depth + 1);
      }
      newline(depth);
      os << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool scalar = true;
      for (const auto& e : j) scalar = scalar && !e.is_structured();
      os << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << (scalar ? ", " : ",");
        if (!scalar) newline(depth + 1);
        write(os, j[i], indent, depth + 1);
      }
      if (!scalar) newline(depth);
      os << ']';
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump_json17(const nlohmann::json& doc, int indent) {
  std::ostringstream os;
  write(os, doc, indent, 0);
  os << '\n';
  return os.str();
}

}  // namespace skeladv
