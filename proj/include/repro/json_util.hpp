#pragma once

// Shared plumbing for the canonical text formats (.study, .attempt, event
// logs, correction sets). All of them are JSON documents with a fixed key
// order, two-space indentation and a trailing newline.

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "repro/graph.hpp"

namespace repro {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kFormatVersion = "1";

/// Malformed input. Syntax errors carry the byte offset reported by the
/// tokenizer; semantic errors (bad enum literal, missing field) carry a JSON
/// pointer to the offending value.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string reason, std::optional<std::size_t> offset, std::string path)
      : std::runtime_error(describe(reason, offset, path)),
        reason_(std::move(reason)),
        offset_(offset),
        path_(std::move(path)) {}

  const std::string& reason() const { return reason_; }
  std::optional<std::size_t> offset() const { return offset_; }
  const std::string& path() const { return path_; }

 private:
  static std::string describe(const std::string& reason, std::optional<std::size_t> offset,
                              const std::string& path) {
    std::string out = "parse error";
    if (offset) out += " at byte " + std::to_string(*offset);
    if (!path.empty()) out += " at " + path;
    return out + ": " + reason;
  }

  std::string reason_;
  std::optional<std::size_t> offset_;
  std::string path_;
};

enum class ParseMode { strict, lenient };

inline Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports the 1-based index of the last byte read.
    std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    std::string what = e.what();
    if (auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ParseError(what, at, "");
  }
}

inline std::string dump_canonical(const Json& j) {
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

/// Walks one JSON object, tracking which keys were consumed so that the
/// remainder can be rejected (strict) or kept as annotations (lenient).
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  const std::string& path() const { return path_; }
  std::string child(std::string_view key) const { return path_ + "/" + std::string(key); }

  [[noreturn]] void fail(const std::string& reason, std::string_view key = {}) const {
    throw ParseError(reason, std::nullopt, key.empty() ? path_ : child(key));
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }

  const Json& required(std::string_view key) {
    auto it = j_.find(std::string(key));
    if (it == j_.end()) fail("missing required field '" + std::string(key) + "'");
    consumed_.insert(std::string(key));
    return *it;
  }

  const Json* optional(std::string_view key) {
    auto it = j_.find(std::string(key));
    if (it == j_.end()) return nullptr;
    consumed_.insert(std::string(key));
    if (it->is_null()) return nullptr;
    return &*it;
  }

  std::string string(std::string_view key) { return as_string(required(key), key); }

  std::string string_or(std::string_view key, std::string fallback) {
    const Json* v = optional(key);
    return v ? as_string(*v, key) : fallback;
  }

  std::optional<std::string> optional_string(std::string_view key) {
    const Json* v = optional(key);
    if (!v) return std::nullopt;
    return as_string(*v, key);
  }

  bool boolean(std::string_view key) {
    const Json& v = required(key);
    if (!v.is_boolean()) fail("expected a boolean", key);
    return v.get<bool>();
  }

  bool boolean_or(std::string_view key, bool fallback) {
    const Json* v = optional(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail("expected a boolean", key);
    return v->get<bool>();
  }

  double number(std::string_view key) { return as_number(required(key), key); }

  std::optional<double> optional_number(std::string_view key) {
    const Json* v = optional(key);
    if (!v) return std::nullopt;
    return as_number(*v, key);
  }

  std::optional<std::int64_t> optional_integer(std::string_view key) {
    const Json* v = optional(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) fail("expected an integer", key);
    return v->get<std::int64_t>();
  }

  /// Array field; absent is an error when `require` is set, otherwise empty.
  const Json& array(std::string_view key, bool require = true) {
    static const Json empty = Json::array();
    const Json* v = require ? &required(key) : optional(key);
    if (!v) return empty;
    if (!v->is_array()) fail("expected an array", key);
    return *v;
  }

  std::vector<std::string> string_list(std::string_view key, bool require = true) {
    std::vector<std::string> out;
    const Json& arr = array(key, require);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string()) fail("expected a string", std::string(key) + "/" + std::to_string(i));
      out.push_back(arr[i].get<std::string>());
    }
    return out;
  }

  /// Rejects unconsumed keys in strict mode; in lenient mode returns them.
  Annotations finish(ParseMode mode) const {
    Annotations extra;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (consumed_.count(it.key())) continue;
      if (mode == ParseMode::strict) fail("unknown field '" + it.key() + "'", it.key());
      extra.emplace(it.key(), it.value().dump());
    }
    return extra;
  }

 private:
  std::string as_string(const Json& v, std::string_view key) const {
    if (!v.is_string()) fail("expected a string", key);
    return v.get<std::string>();
  }

  double as_number(const Json& v, std::string_view key) const {
    if (!v.is_number()) fail("expected a number", key);
    return v.get<double>();
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> consumed_;
};

/// Appends lenient-mode annotations after the known keys, in key order.
inline void put_annotations(Json& obj, const Annotations& extra) {
  for (const auto& [key, text] : extra) {
    if (obj.contains(key)) continue;
    obj[key] = Json::parse(text);
  }
}

template <class Enum, class FromFn>
Enum read_enum(ObjectReader& r, std::string_view key, FromFn from, std::string_view allowed) {
  std::string literal = r.string(key);
  auto v = from(literal);
  if (!v) r.fail("invalid literal '" + literal + "' (expected one of " + std::string(allowed) + ")", key);
  return *v;
}

inline void check_format_version(ObjectReader& r) {
  std::string v = r.string("format_version");
  if (v != kFormatVersion) r.fail("unsupported format_version '" + v + "'", "format_version");
}

}  // namespace repro
