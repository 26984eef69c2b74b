#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "topseg/common.hpp"

namespace topseg {

using Json = nlohmann::json;

// Config parsing is strict: a key nobody reads is a typo, not an extension
// point.
inline void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  require(obj.is_object(), where, ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok |= it.key() == a;
    require(ok, "unknown key \"", it.key(), "\" in ", where);
  }
}

template <class T>
T get_or(const Json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(cat("config: bad value for \"", key, "\""));
  }
}

template <class T>
T get_req(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  require(it != obj.end(), where, ": missing required key \"", key, "\"");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(cat(where, ": bad value for \"", key, "\""));
  }
}

}  // namespace topseg
