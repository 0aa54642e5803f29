#pragma once

#include "neurotrack_cli/session.hpp"

#include <yaml-cpp/yaml.h>

#include <string>

namespace neurotrack::cli {

// Optional key with a typed fallback; a present but ill-typed value is a ConfigError.
template <typename T>
T get(const YAML::Node& node, const char* key, const T& fallback) {
  if (!node) return fallback;
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace neurotrack::cli
