#pragma once

// Dotted-key configuration registry for the command-line tool. Every key has
// a typed default; values arrive from a JSON document, --set k=v pairs and
// dedicated flags, in increasing precedence. Unknown keys are rejected.

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tfuse/error.hpp"
#include "tfuse/io.hpp"

namespace tfuse::cli {

using json = nlohmann::json;

enum class Kind { Real, Count, Flag, Text };

class Registry {
 public:
  struct Entry {
    Kind kind;
    json value;  // null means "automatic" or "required"
    std::string help;
  };

  void add(const std::string& key, Kind kind, json value, std::string help) {
    entries_[key] = Entry{kind, std::move(value), std::move(help)};
  }

  bool contains(const std::string& key) const { return entries_.count(key) > 0; }

  /// Help text with the key and its default appended.
  std::string describe(const std::string& key) const {
    const Entry& e = entry(key);
    std::string d = e.help + " [" + key + "; default: ";
    if (e.value.is_null())
      d += "none";
    else if (e.value.is_string())
      d += e.value.get<std::string>().empty() ? "none" : e.value.get<std::string>();
    else
      d += e.value.dump();
    return d + "]";
  }

  void set_text(const std::string& key, const std::string& text) {
    Entry& e = entry(key);
    switch (e.kind) {
      case Kind::Real: {
        const auto v = parse_double(text);
        if (!v) throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
        e.value = *v;
        break;
      }
      case Kind::Count: {
        std::uint64_t v = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
          throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + text + "'");
        e.value = v;
        break;
      }
      case Kind::Flag:
        if (text == "true" || text == "1")
          e.value = true;
        else if (text == "false" || text == "0")
          e.value = false;
        else
          throw ConfigError("config key '" + key + "': expected true or false, got '" + text + "'");
        break;
      case Kind::Text:
        e.value = text;
        break;
    }
  }

  /// Applies "key=value".
  void set_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    set_text(assignment.substr(0, eq), assignment.substr(eq + 1));
  }

  /// Merges a JSON document with nested objects and/or dotted keys. A
  /// provenance sidecar is accepted as is: its "config" member is used.
  void merge(const json& doc) {
    if (doc.is_object() && doc.contains("config") && doc.contains("command")) {
      merge_at(doc.at("config"), "");
      return;
    }
    merge_at(doc, "");
  }

  double real(const std::string& key) const { return required(key).get<double>(); }
  std::uint64_t count(const std::string& key) const { return required(key).get<std::uint64_t>(); }
  bool flag(const std::string& key) const { return required(key).get<bool>(); }
  std::string text(const std::string& key) const { return required(key).get<std::string>(); }
  bool present(const std::string& key) const {
    const json& v = entry(key).value;
    return !v.is_null() && !(v.is_string() && v.get<std::string>().empty());
  }
  std::optional<double> maybe_real(const std::string& key) const {
    return present(key) ? std::optional<double>(real(key)) : std::nullopt;
  }
  std::optional<std::uint64_t> maybe_count(const std::string& key) const {
    return present(key) ? std::optional<std::uint64_t>(count(key)) : std::nullopt;
  }

  /// Flat object of every key and its resolved value.
  json resolved() const {
    json out = json::object();
    for (const auto& [k, e] : entries_) out[k] = e.value;
    return out;
  }

 private:
  Entry& entry(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }
  const Entry& entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }
  const json& required(const std::string& key) const {
    const json& v = entry(key).value;
    if (v.is_null()) throw ConfigError("config key '" + key + "' has no value");
    return v;
  }

  void merge_at(const json& node, const std::string& prefix) {
    if (node.is_object()) {
      for (const auto& [k, v] : node.items()) merge_at(v, prefix.empty() ? k : prefix + "." + k);
      return;
    }
    if (prefix.empty()) throw ConfigError("config document must be a JSON object");
    Entry& e = entry(prefix);
    if (node.is_null()) {
      e.value = nullptr;
      return;
    }
    bool ok = false;
    switch (e.kind) {
      case Kind::Real:
        ok = node.is_number();
        if (ok) e.value = node.get<double>();
        break;
      case Kind::Count:
        ok = node.is_number_unsigned() || (node.is_number_integer() && node.get<std::int64_t>() >= 0);
        if (ok) e.value = node.get<std::uint64_t>();
        break;
      case Kind::Flag:
        ok = node.is_boolean();
        if (ok) e.value = node;
        break;
      case Kind::Text:
        ok = node.is_string();
        if (ok) e.value = node;
        break;
    }
    if (!ok) throw ConfigError("config key '" + prefix + "': wrong value type " + node.dump());
  }

  std::map<std::string, Entry> entries_;
};

}  // namespace tfuse::cli
