#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "prefgrad/config.hpp"
#include "prefgrad/errors.hpp"
#include "prefgrad/optimizer.hpp"

using namespace prefgrad;
using nlohmann::json;

namespace {

json base_config() {
  return json{
      {"algorithm", "zpg"},
      {"env", {{"builtin", "bandit"}, {"arm_rewards", {0.0, 1.0}}}},
      {"policy", {{"kind", "tabular"}}},
      {"link", {{"kind", "logistic"}}},
      {"T", 5},
      {"N", 2},
      {"M", 16},
      {"L", 0.25},
      {"mu", "auto"},
      {"alpha", "auto"},
      {"trim", "auto"},
      {"seed", 3},
  };
}

ExperimentConfig load(const json& j, bool apply_env_seed = true) {
  return load_config_json(j.dump(), ".", apply_env_seed);
}

struct EnvSeedGuard {
  EnvSeedGuard() { unsetenv("PREFGRAD_SEED"); }
  ~EnvSeedGuard() { unsetenv("PREFGRAD_SEED"); }
};

}  // namespace

TEST_CASE("minimal config: auto markers resolve to the default formulas") {
  EnvSeedGuard guard;
  const ExperimentConfig cfg = load(base_config());
  CHECK(cfg.algorithm == Algorithm::kZpg);
  CHECK(cfg.env.num_states() == 1);
  CHECK(cfg.env.num_actions() == 2);
  CHECK(cfg.policy.dim() == 2);
  CHECK(cfg.link.is_logistic());
  CHECK(cfg.link.horizon_bound() == 1.0);
  CHECK(cfg.theta0.empty());
  CHECK(cfg.hp.T == 5);
  CHECK(cfg.hp.N == 2);
  CHECK(cfg.hp.M == 16);
  CHECK(cfg.hp.L == 0.25);
  CHECK(cfg.hp.seed == 3);
  CHECK(cfg.eval_every == 10);
  CHECK_FALSE(cfg.timing);
  CHECK(cfg.hp.history_stride == 0);  // auto

  const MuAlpha defaults =
      default_hyperparams(Algorithm::kZpg, 2, 1.0, 0.25, 16.0, 2.0);
  CHECK(cfg.hp.mu == defaults.mu);
  CHECK(cfg.hp.alpha == defaults.alpha);
  CHECK(cfg.hp.delta == 0.2689414213699951);  // logistic default trim at B=1
}

TEST_CASE("resolved echo reproduces the run and is a fixed point") {
  EnvSeedGuard guard;
  for (const char* alg : {"zpg", "zbcpg"}) {
    json j = base_config();
    j["algorithm"] = alg;
    if (std::string(alg) == "zbcpg") j["K"] = 1;
    const ExperimentConfig cfg = load(j);

    const json echo = json::parse(cfg.resolved_json);
    CHECK(echo.at("mu").is_number());
    CHECK(echo.at("alpha").is_number());
    CHECK(echo.at("trim").is_number());
    CHECK(echo.at("seed").get<std::uint64_t>() == 3);
    CHECK(echo.at("eval_every").get<int>() == 10);
    CHECK_FALSE(echo.at("timing").get<bool>());

    const ExperimentConfig again = load_config_json(cfg.resolved_json);
    CHECK(again.hp.mu == cfg.hp.mu);
    CHECK(again.hp.alpha == cfg.hp.alpha);
    CHECK(again.hp.delta == cfg.hp.delta);
    CHECK(again.hp.seed == cfg.hp.seed);
    CHECK(again.hp.T == cfg.hp.T);
    CHECK(again.hp.N == cfg.hp.N);
    CHECK(again.hp.M == cfg.hp.M);
    CHECK(again.hp.K == cfg.hp.K);
    CHECK(again.hp.L == cfg.hp.L);
    CHECK(again.eval_every == cfg.eval_every);
    CHECK(again.timing == cfg.timing);
    // Loading the echo echoes the same document: a fixed point.
    CHECK(again.resolved_json == cfg.resolved_json);
  }
}

TEST_CASE("missing required fields name their JSON path") {
  json j = base_config();
  j.erase("T");
  CHECK_THROWS_WITH_AS((void)load(j), doctest::Contains("config.T"),
                       ConfigError);
  j = base_config();
  j.erase("seed");
  CHECK_THROWS_WITH_AS((void)load(j), doctest::Contains("config.seed"),
                       ConfigError);
  j = base_config();
  j["policy"].erase("kind");
  CHECK_THROWS_WITH_AS((void)load(j), doctest::Contains("policy.kind"),
                       ConfigError);
}

TEST_CASE("K is required for zbcpg, rejected for zpg, range-checked") {
  json j = base_config();
  j["algorithm"] = "zbcpg";
  CHECK_THROWS_WITH_AS((void)load(j),
                       doctest::Contains("'K' is required when algorithm"),
                       ConfigError);
  j["K"] = 0;
  CHECK_THROWS_WITH_AS((void)load(j), doctest::Contains("[1, 2]"),
                       ConfigError);
  j["K"] = 3;
  CHECK_THROWS_AS((void)load(j), ConfigError);
  j["K"] = 2;
  CHECK(load(j).hp.K == 2);

  json zpg = base_config();
  zpg["K"] = 1;
  CHECK_THROWS_WITH_AS((void)load(zpg),
                       doctest::Contains("only valid when algorithm"),
                       ConfigError);
}

TEST_CASE("malformed scalar fields") {
  json j = base_config();
  j["mu"] = "bogus";
  CHECK_THROWS_WITH_AS((void)load(j),
                       doctest::Contains("must be a number or \"auto\""),
                       ConfigError);
  j = base_config();
  j["algorithm"] = "sgd";
  CHECK_THROWS_WITH_AS((void)load(j),
                       doctest::Contains("'algorithm' must be"), ConfigError);
  j = base_config();
  j["T"] = -1;
  CHECK_THROWS_AS((void)load(j), ConfigError);
  j = base_config();
  j["L"] = 0.0;
  CHECK_THROWS_AS((void)load(j), ConfigError);
  j = base_config();
  j["trim"] = 0.6;
  CHECK_THROWS_WITH_AS((void)load(j),
                       doctest::Contains("strictly between 0 and 1/2"),
                       ConfigError);
  j = base_config();
  j["env"] = 5;
  CHECK_THROWS_AS((void)load(j), ConfigError);
  CHECK_THROWS_WITH_AS((void)load_config_json("not json at all"),
                       doctest::Contains("not valid JSON"), ConfigError);
  CHECK_THROWS_WITH_AS((void)load_config_json("[1, 2]"),
                       doctest::Contains("must be a JSON object"),
                       ConfigError);
}

TEST_CASE("explicit numbers override the auto markers") {
  json j = base_config();
  j["mu"] = 0.75;
  j["alpha"] = 0.03125;
  j["trim"] = 0.3;
  const ExperimentConfig cfg = load(j);
  CHECK(cfg.hp.mu == 0.75);
  CHECK(cfg.hp.alpha == 0.03125);
  CHECK(cfg.hp.delta == 0.3);
}

TEST_CASE("constants block reshapes the auto formulas") {
  EnvSeedGuard guard;
  json j = base_config();
  // Override the two constants that bind for this configuration (the value
  // branch dominates mu here); the third keeps its default.
  j["constants"] = {{"mu_value_coeff", 1.0}, {"alpha_denom", 1.0}};
  const ExperimentConfig cfg = load(j);
  const MuAlpha expected = default_hyperparams(
      Algorithm::kZpg, 2, 1.0, 0.25, 16.0, 2.0,
      HyperConstants{9.0, 1.0, 1.0});
  CHECK(cfg.hp.mu == expected.mu);
  CHECK(cfg.hp.alpha == expected.alpha);
  const MuAlpha stock =
      default_hyperparams(Algorithm::kZpg, 2, 1.0, 0.25, 16.0, 2.0);
  CHECK(cfg.hp.mu != stock.mu);
  CHECK(cfg.hp.alpha != stock.alpha);
}

TEST_CASE("PREFGRAD_SEED overrides the config seed unless suppressed") {
  EnvSeedGuard guard;
  setenv("PREFGRAD_SEED", "123", 1);
  const ExperimentConfig overridden = load(base_config());
  CHECK(overridden.hp.seed == 123);
  const json echo = json::parse(overridden.resolved_json);
  CHECK(echo.at("seed").get<std::uint64_t>() == 123);

  const ExperimentConfig suppressed = load(base_config(), false);
  CHECK(suppressed.hp.seed == 3);

  setenv("PREFGRAD_SEED", "abc", 1);
  CHECK_THROWS_WITH_AS((void)load(base_config()),
                       doctest::Contains("PREFGRAD_SEED"), ConfigError);
}

TEST_CASE("env accepts a file reference relative to the config directory") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / "prefgrad_config_test_envref";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "chain_env.json");
    out << R"({"builtin": "chain", "num_states": 3, "horizon": 2})";
  }
  json j = base_config();
  j["env"] = "chain_env.json";
  const ExperimentConfig cfg = load_config_json(j.dump(), dir.string());
  CHECK(cfg.env.num_states() == 3);
  CHECK(cfg.env.num_actions() == 2);
  CHECK(cfg.env.horizon() == 2);
  CHECK(cfg.policy.dim() == 3 * 2 * 2);
  // link bound follows the env horizon.
  CHECK(cfg.link.horizon_bound() == 2.0);

  json missing = base_config();
  missing["env"] = "no_such_env.json";
  CHECK_THROWS_AS((void)load_config_json(missing.dump(), dir.string()),
                  ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("policy init: zeros keyword and explicit vectors") {
  json j = base_config();
  j["policy"]["init"] = "zeros";
  CHECK(load(j).theta0.empty());  // empty means zeros downstream

  j["policy"]["init"] = {0.5, -0.5};
  const ExperimentConfig cfg = load(j);
  CHECK(cfg.theta0 == ParamVector({0.5, -0.5}));

  j["policy"]["init"] = {0.5};
  CHECK_THROWS_WITH_AS((void)load(j), doctest::Contains("policy.init"),
                       ConfigError);
  j["policy"]["init"] = "random";
  CHECK_THROWS_AS((void)load(j), ConfigError);
}

TEST_CASE("table link from config") {
  json j = base_config();
  j["link"] = {{"kind", "table"},
               {"xs", {-1.0, 0.0, 1.0}},
               {"ps", {0.25, 0.5, 0.75}}};
  const ExperimentConfig cfg = load(j);
  CHECK_FALSE(cfg.link.is_logistic());
  CHECK(cfg.link.eval(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cfg.hp.delta == doctest::Approx(0.25).epsilon(1e-12));

  j["link"] = {{"kind", "probit"}};
  CHECK_THROWS_WITH_AS((void)load(j), doctest::Contains("link.kind"),
                       ConfigError);
}

TEST_CASE("history: full, stride, and rejection of nonpositive values") {
  json j = base_config();
  j["history"] = "full";
  CHECK(load(j).hp.history_stride == 1);
  j["history"] = 7;
  CHECK(load(j).hp.history_stride == 7);
  j["history"] = 0;
  CHECK_THROWS_WITH_AS((void)load(j), doctest::Contains("stride must be >= 1"),
                       ConfigError);
  j["history"] = "partial";
  CHECK_THROWS_AS((void)load(j), ConfigError);
}

TEST_CASE("eval_every and timing") {
  json j = base_config();
  j["eval_every"] = 0;
  j["timing"] = true;
  const ExperimentConfig cfg = load(j);
  CHECK(cfg.eval_every == 0);
  CHECK(cfg.timing);
  j["eval_every"] = -2;
  CHECK_THROWS_AS((void)load(j), ConfigError);
  j["eval_every"] = 1;
  j["timing"] = "yes";
  CHECK_THROWS_WITH_AS((void)load(j), doctest::Contains("timing"),
                       ConfigError);
}

TEST_CASE("load_config_file reports unopenable paths") {
  CHECK_THROWS_WITH_AS((void)load_config_file("/no/such/config.json"),
                       doctest::Contains("cannot open"), ConfigError);
}
