#pragma once

// Internal helpers for line-oriented JSON parsing with positional diagnostics.

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <json.hpp>
#include <string>

#include "tubelink/errors.hpp"

namespace tubelink::detail {

using json = nlohmann::json;

struct LineContext {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ValidationError(source + ":" + std::to_string(line) + ": " + field + ": " + what);
  }

  const json& require(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(key, "missing");
    return *it;
  }

  long long integer(const json& obj, const char* key) const {
    const auto& v = require(obj, key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long long>();
  }

  double real(const json& obj, const char* key) const { return real_value(require(obj, key), key); }

  double real_value(const json& v, const std::string& field) const {
    if (!v.is_number()) fail(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(field, "non-finite value");
    return d;
  }

  std::string string(const json& obj, const char* key) const {
    const auto& v = require(obj, key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  const json& array(const json& obj, const char* key) const {
    const auto& v = require(obj, key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
  }
};

/// Calls fn(ctx, object) for every non-blank line. Blank lines are skipped.
inline void for_each_json_line(std::istream& in, const std::string& source,
                               const std::function<void(const LineContext&, const json&)>& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const LineContext ctx{source, line};
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      ctx.fail("<record>", std::string("malformed JSON (") + e.what() + ")");
    }
    if (!obj.is_object()) ctx.fail("<record>", "expected a JSON object");
    try {
      fn(ctx, obj);
    } catch (const ValidationError&) {
      throw;
    } catch (const json::exception& e) {
      ctx.fail("<record>", e.what());
    }
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace tubelink::detail
