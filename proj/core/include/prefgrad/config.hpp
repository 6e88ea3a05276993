#pragma once

#include <optional>
#include <string>

#include "prefgrad/env.hpp"
#include "prefgrad/optimizer.hpp"
#include "prefgrad/policy.hpp"
#include "prefgrad/preference.hpp"

namespace prefgrad {

/// Fully resolved experiment description. "auto" markers from the input JSON
/// are already replaced by numbers; resolved_json is the canonical echo,
/// which reproduces this exact experiment when loaded again.
struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kZpg;
  EnvModel env;
  PolicyModel policy;
  LinkFunction link;
  ParamVector theta0;  // empty means zeros
  HyperParams hp;      // mu, alpha, delta all resolved to numbers
  int eval_every = 10;
  bool timing = false;
  std::string resolved_json;

  ExperimentConfig(EnvModel e, PolicyModel p, LinkFunction l)
      : env(std::move(e)), policy(std::move(p)), link(std::move(l)) {}
};

/// Parse and resolve an experiment config. base_dir anchors relative env
/// file references; the PREFGRAD_SEED environment variable, when set,
/// overrides the seed (sweeps pass apply_env_seed = false so derived
/// per-run seeds stay authoritative). Schema violations raise ConfigError
/// naming the field path.
ExperimentConfig load_config_json(const std::string& text,
                                  const std::string& base_dir = ".",
                                  bool apply_env_seed = true);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace prefgrad
