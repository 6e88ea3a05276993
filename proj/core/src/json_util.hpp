#pragma once

// Checked access into nlohmann::json values. Every failure names the JSON
// path of the offending field so config errors are actionable.

#include <string>
#include <vector>

#include <json.hpp>

#include "prefgrad/errors.hpp"

namespace prefgrad::jsonutil {

using nlohmann::json;

inline std::string quote(const std::string& path) { return "'" + path + "'"; }

inline const json& member(const json& obj, const std::string& path,
                          const std::string& key) {
  if (!obj.is_object()) {
    throw ConfigError(quote(path) + " must be a JSON object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError("missing required field " + quote(path + "." + key));
  }
  return *it;
}

inline const json* member_opt(const json& obj, const std::string& path,
                              const std::string& key) {
  if (!obj.is_object()) {
    throw ConfigError(quote(path) + " must be a JSON object");
  }
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(quote(path) + " must be a string");
  return v.get<std::string>();
}

inline double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(quote(path) + " must be a number");
  return v.get<double>();
}

inline long long get_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) {
    throw ConfigError(quote(path) + " must be an integer");
  }
  return v.get<long long>();
}

inline bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(quote(path) + " must be a boolean");
  return v.get<bool>();
}

inline const json& get_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(quote(path) + " must be an array");
  return v;
}

inline std::vector<double> get_number_array(const json& v,
                                            const std::string& path) {
  get_array(v, path);
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(get_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline json parse(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(what + ": not valid JSON");
  return j;
}

}  // namespace prefgrad::jsonutil
