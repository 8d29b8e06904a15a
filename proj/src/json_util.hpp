// Strict JSON plumbing shared by the file formats: parse with
// location-carrying errors, reject unknown keys, require typed fields.
#pragma once

#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "latbal/domain.hpp"

namespace latbal::jsonutil {

using nlohmann::json;

inline json parse_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) {
    throw ParseError(path + ": cannot open file");
  }
  std::string text;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) {
    text.append(buf, got);
  }
  std::fclose(f);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const json& j) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    throw Error(path + ": cannot open file for writing");
  }
  const std::string text = j.dump(2) + "\n";
  const std::size_t wrote = std::fwrite(text.data(), 1, text.size(), f);
  const int rc = std::fclose(f);
  if (wrote != text.size() || rc != 0) {
    throw Error(path + ": write failed");
  }
}

// Requires j to be an object whose every key appears in `allowed`.
inline void check_object(const json& j, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError(where + ": expected an object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (std::string_view key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
    }
  }
}

inline const json& require_field(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(where + ": missing key \"" + key + "\"");
  }
  return *it;
}

inline double number_field(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number()) {
    throw ConfigError(where + ": \"" + key + "\" must be a number");
  }
  return v.get<double>();
}

inline std::int64_t int_field(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number_integer()) {
    throw ConfigError(where + ": \"" + key + "\" must be an integer");
  }
  return v.get<std::int64_t>();
}

inline std::uint64_t seed_field(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0)) {
    throw ConfigError(where + ": \"" + key + "\" must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::string string_field(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_string()) {
    throw ConfigError(where + ": \"" + key + "\" must be a string");
  }
  return v.get<std::string>();
}

inline std::vector<int> int_vector_field(const json& j, const char* key,
                                         const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_array()) {
    throw ConfigError(where + ": \"" + key + "\" must be an array");
  }
  std::vector<int> out;
  for (const auto& item : v) {
    if (!item.is_number_integer()) {
      throw ConfigError(where + ": \"" + key + "\" must contain integers");
    }
    out.push_back(item.get<int>());
  }
  return out;
}

}  // namespace latbal::jsonutil
