#pragma once

#include <stdexcept>
#include <string>

namespace prefgrad {

/// Invalid model, hyperparameter, or experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Exact computation refused because the enumeration budget is exceeded.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace prefgrad
