#include "prefgrad/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json_util.hpp"
#include "prefgrad/errors.hpp"

namespace prefgrad {

namespace {

namespace ju = jsonutil;
using nlohmann::json;

// "auto" or a number; returns nullopt for "auto".
std::optional<double> auto_or_number(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return std::nullopt;
    throw ConfigError(ju::quote(path) + " must be a number or \"auto\"");
  }
  return ju::get_number(v, path);
}

EnvModel parse_env(const json& v, const std::string& base_dir) {
  if (v.is_string()) {
    std::filesystem::path ref(v.get<std::string>());
    if (ref.is_relative()) ref = std::filesystem::path(base_dir) / ref;
    return load_env_file(ref.string());
  }
  if (!v.is_object()) {
    throw ConfigError("'env' must be an inline object or a file path string");
  }
  return load_env_json(v.dump());
}

PolicyModel parse_policy(const json& v, const EnvModel& env,
                         ParamVector& theta0) {
  const std::string kind =
      ju::get_string(ju::member(v, "policy", "kind"), "policy.kind");
  PolicyModel policy = [&]() {
    if (kind == "tabular") {
      return PolicyModel::tabular(env.num_states(), env.num_actions(),
                                  env.horizon());
    }
    if (kind == "linear") {
      const json& rows =
          ju::get_array(ju::member(v, "policy", "features"), "policy.features");
      if (rows.empty()) {
        throw ConfigError("'policy.features' must have at least one row");
      }
      const int dim = static_cast<int>(rows.size());
      std::vector<double> flat;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string path =
            "policy.features[" + std::to_string(r) + "]";
        std::vector<double> row = ju::get_number_array(rows[r], path);
        flat.insert(flat.end(), row.begin(), row.end());
      }
      return PolicyModel::linear(env.num_states(), env.num_actions(),
                                 env.horizon(), dim, std::move(flat));
    }
    throw ConfigError("'policy.kind' must be \"tabular\" or \"linear\"");
  }();

  if (const json* init = ju::member_opt(v, "policy", "init")) {
    if (init->is_string()) {
      if (init->get<std::string>() != "zeros") {
        throw ConfigError("'policy.init' must be \"zeros\" or a number array");
      }
      theta0.clear();
    } else {
      theta0 = ju::get_number_array(*init, "policy.init");
      if (theta0.size() != static_cast<std::size_t>(policy.dim())) {
        throw ConfigError("'policy.init' has " +
                          std::to_string(theta0.size()) +
                          " entries, expected " + std::to_string(policy.dim()));
      }
    }
  } else {
    theta0.clear();
  }
  return policy;
}

LinkFunction parse_link(const json& v, const EnvModel& env) {
  const std::string kind =
      ju::get_string(ju::member(v, "link", "kind"), "link.kind");
  std::optional<double> lipschitz;
  if (const json* l = ju::member_opt(v, "link", "lipschitz_inv")) {
    lipschitz = ju::get_number(*l, "link.lipschitz_inv");
  }
  const double bound = static_cast<double>(env.horizon());
  if (kind == "logistic") {
    return LinkFunction::logistic(bound, lipschitz);
  }
  if (kind == "table") {
    std::vector<double> xs =
        ju::get_number_array(ju::member(v, "link", "xs"), "link.xs");
    std::vector<double> ps =
        ju::get_number_array(ju::member(v, "link", "ps"), "link.ps");
    return LinkFunction::monotone_table(std::move(xs), std::move(ps), bound,
                                        lipschitz);
  }
  throw ConfigError("'link.kind' must be \"logistic\" or \"table\"");
}

}  // namespace

ExperimentConfig load_config_json(const std::string& text,
                                  const std::string& base_dir,
                                  bool apply_env_seed) {
  const json root = ju::parse(text, "config");
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  const std::string alg_name = ju::get_string(
      ju::member(root, "config", "algorithm"), "algorithm");
  Algorithm algorithm;
  if (alg_name == "zpg") {
    algorithm = Algorithm::kZpg;
  } else if (alg_name == "zbcpg") {
    algorithm = Algorithm::kZbcpg;
  } else {
    throw ConfigError("'algorithm' must be \"zpg\" or \"zbcpg\"");
  }

  EnvModel env = parse_env(ju::member(root, "config", "env"), base_dir);
  ParamVector theta0;
  PolicyModel policy =
      parse_policy(ju::member(root, "config", "policy"), env, theta0);
  LinkFunction link = parse_link(ju::member(root, "config", "link"), env);

  ExperimentConfig cfg(std::move(env), std::move(policy), std::move(link));
  cfg.algorithm = algorithm;
  cfg.theta0 = std::move(theta0);

  HyperParams& hp = cfg.hp;
  hp.T = static_cast<int>(
      ju::get_integer(ju::member(root, "config", "T"), "T"));
  hp.N = static_cast<int>(
      ju::get_integer(ju::member(root, "config", "N"), "N"));
  hp.M = static_cast<int>(
      ju::get_integer(ju::member(root, "config", "M"), "M"));
  if (hp.T < 0) throw ConfigError("'T' must be >= 0");
  if (hp.N < 1) throw ConfigError("'N' must be >= 1");
  if (hp.M < 1) throw ConfigError("'M' must be >= 1");

  if (algorithm == Algorithm::kZbcpg) {
    const json* k = ju::member_opt(root, "config", "K");
    if (k == nullptr) {
      throw ConfigError(
          "'K' is required when algorithm is \"zbcpg\" (block size in "
          "[1, d])");
    }
    hp.K = static_cast<int>(ju::get_integer(*k, "K"));
    if (hp.K < 1 || hp.K > cfg.policy.dim()) {
      throw ConfigError("'K' must lie in [1, " +
                        std::to_string(cfg.policy.dim()) + "]");
    }
  } else if (const json* k = ju::member_opt(root, "config", "K")) {
    (void)k;
    throw ConfigError("'K' is only valid when algorithm is \"zbcpg\"");
  }

  hp.L = ju::get_number(ju::member(root, "config", "L"), "L");
  if (!(hp.L > 0.0)) throw ConfigError("'L' must be positive");

  // Optional overrides of the default-formula constants.
  std::optional<HyperConstants> constants;
  if (const json* c = ju::member_opt(root, "config", "constants")) {
    HyperConstants hc = default_constants(algorithm);
    if (const json* x = ju::member_opt(*c, "constants", "mu_pref_coeff")) {
      hc.mu_pref_coeff = ju::get_number(*x, "constants.mu_pref_coeff");
    }
    if (const json* x = ju::member_opt(*c, "constants", "mu_value_coeff")) {
      hc.mu_value_coeff = ju::get_number(*x, "constants.mu_value_coeff");
    }
    if (const json* x = ju::member_opt(*c, "constants", "alpha_denom")) {
      hc.alpha_denom = ju::get_number(*x, "constants.alpha_denom");
    }
    constants = hc;
  }

  // The declared L and the link's declared inverse Lipschitz constant (when
  // present) reconcile to their maximum for the default formulas, matching
  // the optimizer's behavior.
  double formula_lipschitz = hp.L;
  if (cfg.link.lipschitz_user_set()) {
    formula_lipschitz = std::max(formula_lipschitz, cfg.link.lipschitz_inv());
  }

  const std::optional<double> mu =
      auto_or_number(ju::member(root, "config", "mu"), "mu");
  const std::optional<double> alpha =
      auto_or_number(ju::member(root, "config", "alpha"), "alpha");
  const MuAlpha defaults = default_hyperparams(
      algorithm, cfg.policy.dim(), cfg.link.horizon_bound(),
      formula_lipschitz, static_cast<double>(hp.M), static_cast<double>(hp.N),
      constants);
  hp.mu = mu.value_or(defaults.mu);
  hp.alpha = alpha.value_or(defaults.alpha);
  if (!(hp.mu > 0.0)) throw ConfigError("'mu' must be positive");
  if (!(hp.alpha > 0.0)) throw ConfigError("'alpha' must be positive");

  const std::optional<double> trim_level =
      auto_or_number(ju::member(root, "config", "trim"), "trim");
  hp.delta = trim_level.value_or(cfg.link.default_trim_level());
  if (!(hp.delta > 0.0 && hp.delta < 0.5)) {
    throw ConfigError("'trim' must lie strictly between 0 and 1/2");
  }

  hp.seed = static_cast<std::uint64_t>(
      ju::get_integer(ju::member(root, "config", "seed"), "seed"));
  if (const char* env_seed = apply_env_seed ? std::getenv("PREFGRAD_SEED")
                                            : nullptr) {
    try {
      hp.seed = std::stoull(env_seed);
    } catch (const std::exception&) {
      throw ConfigError(
          "PREFGRAD_SEED must be an unsigned integer, got '" +
          std::string(env_seed) + "'");
    }
  }

  if (const json* e = ju::member_opt(root, "config", "eval_every")) {
    cfg.eval_every = static_cast<int>(ju::get_integer(*e, "eval_every"));
    if (cfg.eval_every < 0) throw ConfigError("'eval_every' must be >= 0");
  }

  if (const json* h = ju::member_opt(root, "config", "history")) {
    if (h->is_string()) {
      if (h->get<std::string>() != "full") {
        throw ConfigError("'history' must be \"full\" or a positive stride");
      }
      hp.history_stride = 1;
    } else {
      hp.history_stride = static_cast<int>(ju::get_integer(*h, "history"));
      if (hp.history_stride < 1) {
        throw ConfigError("'history' stride must be >= 1");
      }
    }
  }

  if (const json* t = ju::member_opt(root, "config", "timing")) {
    cfg.timing = ju::get_bool(*t, "timing");
  }

  // Canonical echo: explicit numbers everywhere a marker could have been, so
  // loading the echo reproduces this run bit for bit.
  json echo = root;
  echo["algorithm"] = alg_name;
  echo["mu"] = hp.mu;
  echo["alpha"] = hp.alpha;
  echo["trim"] = hp.delta;
  echo["seed"] = hp.seed;
  echo["eval_every"] = cfg.eval_every;
  echo["timing"] = cfg.timing;
  if (hp.history_stride > 0) echo["history"] = hp.history_stride;
  cfg.resolved_json = echo.dump(2);

  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config_json(buf.str(),
                          std::filesystem::path(path).parent_path().string());
}

}  // namespace prefgrad
