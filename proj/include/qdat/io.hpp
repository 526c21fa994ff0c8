#pragma once

#include "qdat/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace qdat {

using Json = nlohmann::json;

namespace detail {

inline void canonical_dump(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      // nlohmann's default object is key-sorted, which is exactly the
      // canonical order.
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        canonical_dump(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        canonical_dump(v, out);
      }
      out += ']';
      break;
    }
    case Json::value_t::string:
      out += j.dump();
      break;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) throw NumericalError("report contains a non-finite number");
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    case Json::value_t::null:
      out += "null";
      break;
    default:
      throw IoError("report contains an unsupported value type");
  }
}

}  // namespace detail

/// Canonical text form: sorted keys, no whitespace, floats at 17 significant
/// digits. Equal reports serialize to equal bytes.
inline std::string canonical_dump(const Json& j) {
  std::string out;
  detail::canonical_dump(j, out);
  return out;
}

/// Writes a report in canonical form. A metadata block is added when absent,
/// so even an empty report stays a valid, identifiable document.
inline void emit_report(Json report, const std::string& path) {
  if (!report.is_object()) throw ValidationError("report: top level must be an object");
  if (!report.contains("meta")) report["meta"] = Json{{"tool", "qdat"}, {"format", 1}};
  const std::string text = canonical_dump(report) + "\n";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open report path: " + path);
  os << text;
  os.flush();
  if (!os) throw IoError("failed writing report: " + path);
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open output path: " + path);
  os << content;
  os.flush();
  if (!os) throw IoError("failed writing output: " + path);
}

}  // namespace qdat
