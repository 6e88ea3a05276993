#include "prefgrad/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json_util.hpp"
#include "prefgrad/diagnostics.hpp"
#include "prefgrad/errors.hpp"

namespace prefgrad {

namespace {

namespace ju = jsonutil;
namespace fs = std::filesystem;
using nlohmann::json;

// 17 significant digits round-trip any double exactly; the fixed format is
// what makes reruns byte-identical.
std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

std::string algorithm_name(Algorithm alg) {
  return alg == Algorithm::kZpg ? "zpg" : "zbcpg";
}

void print_report(const Report& report) {
  for (const CheckItem& item : report.items) {
    std::printf("[%s] %s {%s}: empirical=%.6g bound=%.6g slack=%.3g\n",
                item.pass ? "PASS" : "FAIL", item.check.c_str(),
                item.params.c_str(), item.empirical, item.bound, item.slack);
  }
}

void merge_into(Report& all, const Report& part) {
  all.items.insert(all.items.end(), part.items.begin(), part.items.end());
}

// Fixed non-stationary parameter point for the bundled d=8 chain fixtures.
ParamVector default_diag_theta() {
  return {0.4, -0.2, 0.1, 0.3, -0.4, 0.2, -0.1, -0.3};
}

// Smoothness bound for the bundled diagnostics chain (two states, horizon
// two, slip 0.1). The value Hessian's spectral norm, measured numerically
// over the box [-3, 3]^8, peaks near 0.154; 0.5 keeps a 3x safety margin
// while the one-sided smoothing bounds stay informative.
constexpr double kChainDiagSmoothness = 0.5;

std::uint64_t default_diag_seed() {
  if (const char* env_seed = std::getenv("PREFGRAD_SEED")) {
    try {
      return std::stoull(env_seed);
    } catch (const std::exception&) {
      throw ConfigError("PREFGRAD_SEED must be an unsigned integer, got '" +
                        std::string(env_seed) + "'");
    }
  }
  return 1;
}

struct DiagnoseSetup {
  EnvModel env;
  PolicyModel policy;
  LinkFunction link;
  ParamVector theta;
  double mu = 0.1;
  double smoothness = kChainDiagSmoothness;
  std::vector<int> block_sizes;
  int sphere_dim = 6;
  std::uint64_t seed = 1;
  double enumeration_cap = kDefaultEnumerationCap;

  DiagnoseSetup(EnvModel e, PolicyModel p, LinkFunction l)
      : env(std::move(e)), policy(std::move(p)), link(std::move(l)) {}
};

DiagnoseSetup make_diagnose_setup(const std::optional<std::string>& config) {
  if (config) {
    ExperimentConfig cfg = load_config_file(*config);
    DiagnoseSetup setup(std::move(cfg.env), std::move(cfg.policy),
                        std::move(cfg.link));
    setup.theta = cfg.theta0.empty()
                      ? ParamVector(static_cast<std::size_t>(setup.policy.dim()), 0.0)
                      : cfg.theta0;
    setup.mu = cfg.hp.mu;
    setup.smoothness = cfg.hp.L;
    setup.sphere_dim = setup.policy.dim();
    if (cfg.algorithm == Algorithm::kZbcpg && cfg.hp.K >= 1) {
      setup.block_sizes = {cfg.hp.K};
    } else {
      const int d = setup.policy.dim();
      setup.block_sizes = {1};
      if (d > 3) setup.block_sizes.push_back(3);
      if (d > 1) setup.block_sizes.push_back(d);
    }
    setup.seed = cfg.hp.seed;
    setup.enumeration_cap = cfg.hp.enumeration_cap;
    return setup;
  }
  EnvModel env = make_chain(2, 2, 0.1);
  PolicyModel policy = PolicyModel::tabular(env.num_states(),
                                            env.num_actions(), env.horizon());
  DiagnoseSetup setup(std::move(env), std::move(policy),
                      LinkFunction::logistic(2.0));
  setup.theta = default_diag_theta();
  setup.block_sizes = {1, 3, 8};
  setup.seed = default_diag_seed();
  return setup;
}

Report run_check(const std::string& check, const DiagnoseSetup& setup) {
  Report all;
  all.suite = check;
  std::uint64_t seed = setup.seed;

  if (check == "sampler-moments") {
    merge_into(all, validate_sampler_moments(setup.sphere_dim,
                                             setup.policy.dim(),
                                             setup.block_sizes, 100000, seed));
  } else if (check == "concentration") {
    const double bound = setup.link.horizon_bound();
    const double trim_floor = setup.link.default_trim_level();
    // Reward gaps realizing p = 1/2, p = 3/4 (when the link reaches it on
    // the trimmed interval), and the trim-boundary preference sigma(-B).
    std::vector<std::pair<double, double>> rewards = {{0.0, 0.0}};
    if (0.75 <= 1.0 - trim_floor + 1e-12) {
      const double gap = setup.link.inverse(0.75);
      rewards.emplace_back(gap, 0.0);
    }
    rewards.emplace_back(0.0, bound);
    for (const auto& [r1, r0] : rewards) {
      for (int m_bits : {64, 100, 1024}) {
        merge_into(all, validate_concentration(setup.link, r1, r0, m_bits,
                                               10000, 0.05, seed++));
      }
    }
  } else if (check == "reward-bias") {
    for (double gap : {0.0, 0.8}) {
      for (int m_bits : {64, 256, 1024}) {
        merge_into(all, validate_reward_bias(setup.link, gap, 0.0, m_bits,
                                             10000, seed++));
      }
    }
  } else if (check == "smoothing") {
    for (double mu : {0.05, 0.1}) {
      merge_into(all,
                 validate_smoothing(setup.env, setup.policy, setup.theta, mu,
                                    setup.smoothness, 100000, seed++));
    }
  } else if (check == "grad-unbiasedness") {
    merge_into(all, validate_grad_unbiasedness(setup.env, setup.policy,
                                               setup.theta, setup.mu, 100000,
                                               seed));
  } else {
    throw ConfigError("unknown check '" + check + "'");
  }
  return all;
}

}  // namespace

const std::vector<std::string>& diagnose_check_names() {
  static const std::vector<std::string> names = {
      "sampler-moments", "concentration", "reward-bias", "smoothing",
      "grad-unbiasedness"};
  return names;
}

RunArtifacts run_experiment(const ExperimentConfig& cfg,
                            const std::string& out_dir) {
  fs::create_directories(out_dir);

  HyperParams hp = cfg.hp;
  hp.record_timing = cfg.timing;
  RunArtifacts art;
  art.result = cfg.algorithm == Algorithm::kZpg
                   ? zpg_run(cfg.env, cfg.policy, cfg.link, hp, cfg.theta0)
                   : zbcpg_run(cfg.env, cfg.policy, cfg.link, hp, cfg.theta0);
  const OptResult& res = art.result;

  std::string csv = "iter,value_readout,grad_est_norm,stationarity,queries_cum,wall_ms\n";
  for (const IterationRecord& rec : res.records) {
    std::string stationarity;
    if (cfg.eval_every > 0 && rec.t % cfg.eval_every == 0 &&
        rec.theta_index >= 0) {
      const ParamVector& theta_t =
          res.theta_history[static_cast<std::size_t>(rec.theta_index)];
      stationarity = fmt_double(stationarity_metric(
          cfg.env, cfg.policy, theta_t, 1e-5, cfg.hp.enumeration_cap));
    }
    csv += std::to_string(rec.t);
    csv += ',';
    csv += fmt_double(rec.value_readout);
    csv += ',';
    csv += fmt_double(rec.grad_est_norm);
    csv += ',';
    csv += stationarity;
    csv += ',';
    csv += std::to_string(rec.queries_cum);
    csv += ',';
    csv += cfg.timing ? fmt_double(rec.wall_ms) : std::string("0");
    csv += '\n';
  }
  const fs::path dir(out_dir);
  art.metrics_csv_path = (dir / "metrics.csv").string();
  write_text_file(art.metrics_csv_path, csv);

  if (cfg.eval_every > 0) {
    art.stationarity_final = stationarity_metric(
        cfg.env, cfg.policy, res.theta_final, 1e-5, cfg.hp.enumeration_cap);
    art.stationarity_theta_r = stationarity_metric(
        cfg.env, cfg.policy, res.theta_r, 1e-5, cfg.hp.enumeration_cap);
  }

  json result;
  result["algorithm"] = algorithm_name(cfg.algorithm);
  result["seed"] = cfg.hp.seed;
  json hyper;
  hyper["T"] = cfg.hp.T;
  hyper["N"] = cfg.hp.N;
  hyper["M"] = cfg.hp.M;
  if (cfg.algorithm == Algorithm::kZbcpg) hyper["K"] = cfg.hp.K;
  hyper["mu"] = cfg.hp.mu;
  hyper["alpha"] = cfg.hp.alpha;
  hyper["trim"] = cfg.hp.delta;
  hyper["L"] = cfg.hp.L;
  hyper["history_stride"] = res.history_stride;
  result["hyperparams"] = hyper;
  result["total_queries"] = res.total_queries;
  result["theta_r"] = res.theta_r;
  result["theta_r_index"] = res.theta_r_index;
  result["theta_final"] = res.theta_final;
  if (art.stationarity_final) {
    result["stationarity_final"] = *art.stationarity_final;
    result["stationarity_theta_r"] = *art.stationarity_theta_r;
  }
  result["warnings"] = res.warnings;
  art.result_json_path = (dir / "result.json").string();
  write_text_file(art.result_json_path, result.dump(2) + "\n");

  if (!cfg.resolved_json.empty()) {
    art.resolved_config_path = (dir / "resolved_config.json").string();
    write_text_file(art.resolved_config_path, cfg.resolved_json + "\n");
  }
  return art;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  try {
    const ExperimentConfig cfg = load_config_file(config_path);
    const RunArtifacts art = run_experiment(cfg, out_dir);
    for (const std::string& w : art.result.warnings) {
      std::cerr << "warning: " << w << "\n";
    }
    std::printf("run complete: T=%d total_queries=%lld theta_r_index=%d\n",
                cfg.hp.T, static_cast<long long>(art.result.total_queries),
                art.result.theta_r_index);
    if (art.stationarity_final) {
      std::printf("stationarity: final=%.6g theta_r=%.6g\n",
                  *art.stationarity_final, *art.stationarity_theta_r);
    }
    std::printf("wrote %s\n", art.metrics_csv_path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_diagnose(const std::string& check,
                 const std::optional<std::string>& config_path,
                 const std::string& out_dir) {
  const auto& names = diagnose_check_names();
  if (std::find(names.begin(), names.end(), check) == names.end()) {
    std::cerr << "error: unknown check '" << check << "'\n"
              << "usage: diagnose --check <name> [--config <path>] --out "
                 "<dir>\n  valid checks:";
    for (const std::string& name : names) std::cerr << " " << name;
    std::cerr << "\n";
    return 2;
  }
  try {
    const DiagnoseSetup setup = make_diagnose_setup(config_path);
    const Report report = run_check(check, setup);
    fs::create_directories(out_dir);
    const fs::path report_path = fs::path(out_dir) / "report.json";
    write_text_file(report_path, report_to_json(report) + "\n");
    print_report(report);
    std::printf("%s: %zu/%zu checks passed; wrote %s\n", check.c_str(),
                static_cast<std::size_t>(std::count_if(
                    report.items.begin(), report.items.end(),
                    [](const CheckItem& i) { return i.pass; })),
                report.items.size(), report_path.string().c_str());
    return report.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<std::string>& values, int num_seeds,
              const std::string& out_dir) {
  if (axis != "T" && axis != "M" && axis != "N" && axis != "K") {
    std::cerr << "error: sweep axis must be one of T, M, N, K (got '" << axis
              << "'); multi-axis sweeps are not supported\n";
    return 2;
  }
  if (values.empty()) {
    std::cerr << "error: sweep needs at least one value\n";
    return 2;
  }
  if (num_seeds < 1) {
    std::cerr << "error: sweep needs at least one seed\n";
    return 2;
  }
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("config: cannot open file '" + config_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const std::string base_dir =
        fs::path(config_path).parent_path().string();
    const json root = ju::parse(text, "config");
    // The base load applies the PREFGRAD_SEED override (if any); per-run
    // seeds derive from that base and are then authoritative.
    const std::uint64_t base_seed =
        load_config_json(text, base_dir).hp.seed;

    std::vector<long long> axis_values;
    axis_values.reserve(values.size());
    for (const std::string& s : values) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        axis_values.push_back(v);
      } catch (const std::exception&) {
        throw ConfigError("sweep value '" + s + "' is not an integer");
      }
    }

    std::string summary = "axis,value,seed,final_stationarity,total_queries\n";
    fs::create_directories(out_dir);
    for (long long value : axis_values) {
      for (int i = 0; i < num_seeds; ++i) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        json patched = root;
        patched[axis] = value;
        patched["seed"] = seed;
        const ExperimentConfig cfg =
            load_config_json(patched.dump(), base_dir,
                             /*apply_env_seed=*/false);
        const std::string subdir =
            (fs::path(out_dir) /
             (axis + std::to_string(value) + "_seed" + std::to_string(seed)))
                .string();
        const RunArtifacts art = run_experiment(cfg, subdir);
        const double stationarity =
            art.stationarity_final
                ? *art.stationarity_final
                : stationarity_metric(cfg.env, cfg.policy,
                                      art.result.theta_final, 1e-5,
                                      cfg.hp.enumeration_cap);
        summary += axis;
        summary += ',';
        summary += std::to_string(value);
        summary += ',';
        summary += std::to_string(seed);
        summary += ',';
        summary += fmt_double(stationarity);
        summary += ',';
        summary += std::to_string(art.result.total_queries);
        summary += '\n';
        std::printf("sweep %s=%lld seed=%llu: stationarity=%.6g\n",
                    axis.c_str(), value,
                    static_cast<unsigned long long>(seed), stationarity);
      }
    }
    const fs::path summary_path = fs::path(out_dir) / "summary.csv";
    write_text_file(summary_path, summary);
    std::printf("wrote %s (%zu runs)\n", summary_path.string().c_str(),
                axis_values.size() * static_cast<std::size_t>(num_seeds));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace prefgrad
