#include "prefgrad/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "prefgrad/errors.hpp"
#include "prefgrad/perturb.hpp"

namespace prefgrad {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

struct ResolvedRun {
  double delta;
  double lipschitz;  // effective L after reconciling declared constants
};

// One declared L drives both the smoothing analysis and the inverse-link
// bounds. When the caller declares a separate inverse-link constant on the
// link itself and it disagrees with hp.L, the larger one wins (the analysis
// assumes a single constant covering both roles); the reconciliation is
// reported as a warning. An auto-derived link constant is a fallback for
// diagnostics, not a declaration, so it does not participate.
ResolvedRun resolve_run(const LinkFunction& sigma, const HyperParams& hp,
                        std::vector<std::string>& warnings) {
  require(std::isfinite(hp.L) && hp.L > 0.0,
          "optimizer: L must be positive");
  ResolvedRun out{0.0, hp.L};
  if (sigma.lipschitz_user_set() && sigma.lipschitz_inv() != hp.L) {
    out.lipschitz = std::max(hp.L, sigma.lipschitz_inv());
    warnings.push_back(
        "declared L = " + std::to_string(hp.L) +
        " and link inverse Lipschitz = " + std::to_string(sigma.lipschitz_inv()) +
        " differ; using their maximum " + std::to_string(out.lipschitz));
  }

  const double floor = sigma.default_trim_level();
  if (hp.delta < 0.0) {
    out.delta = floor;
  } else {
    require(hp.delta > 0.0 && hp.delta < 0.5,
            "optimizer: trim level must lie strictly between 0 and 1/2");
    require(hp.delta >= floor - 1e-12,
            "optimizer: trim level " + std::to_string(hp.delta) +
                " is below the link's default trim level " +
                std::to_string(floor) +
                "; the inverse link is only defined on the trimmed interval");
    out.delta = hp.delta;
  }
  return out;
}

OptResult run_impl(Algorithm alg, const EnvModel& env,
                   const PolicyModel& policy, const LinkFunction& sigma,
                   const HyperParams& hp, ParamVector theta0) {
  const int d = policy.dim();
  require(policy.num_states() == env.num_states() &&
              policy.num_actions() == env.num_actions() &&
              policy.horizon() == env.horizon(),
          "optimizer: policy and env shapes differ");
  require(hp.T >= 0, "optimizer: T must be >= 0");
  require(hp.N >= 1, "optimizer: N must be >= 1");
  require(hp.M >= 1, "optimizer: M must be >= 1");
  require(std::isfinite(hp.mu) && hp.mu > 0.0, "optimizer: mu must be positive");
  require(std::isfinite(hp.alpha) && hp.alpha > 0.0,
          "optimizer: alpha must be positive");
  if (alg == Algorithm::kZbcpg) {
    require(hp.K >= 1 && hp.K <= d,
            "optimizer: K must lie in [1, d], got K = " + std::to_string(hp.K));
  }
  require(static_cast<double>(env.horizon()) <= sigma.horizon_bound() + 1e-12,
          "optimizer: link horizon bound is below the maximum trajectory "
          "reward");

  if (theta0.empty()) {
    theta0.assign(static_cast<std::size_t>(d), 0.0);
  }
  require(theta0.size() == static_cast<std::size_t>(d),
          "optimizer: theta0 dimension differs from the policy dimension");

  OptResult out;
  const ResolvedRun resolved = resolve_run(sigma, hp, out.warnings);

  const double m_floor =
      std::ceil(4.0 * (sigma.horizon_bound() / resolved.lipschitz) *
                (sigma.horizon_bound() / resolved.lipschitz));
  if (static_cast<double>(hp.M) < m_floor) {
    out.warnings.push_back(
        "M = " + std::to_string(hp.M) +
        " is below the theoretical floor ceil(4 (B/L)^2) = " +
        std::to_string(static_cast<long long>(m_floor)) +
        "; preference-estimate bias bounds may not hold");
  }

  int stride = hp.history_stride;
  require(stride >= 0, "optimizer: history_stride must be >= 0");
  if (stride == 0) {
    const double entries = static_cast<double>(d) * std::max(hp.T, 1);
    stride = entries <= 1e6
                 ? 1
                 : static_cast<int>(std::ceil(entries / 1e6));
  }
  out.history_stride = stride;

  const StreamFamily family(hp.seed);
  ParamVector theta = std::move(theta0);
  out.records.reserve(static_cast<std::size_t>(hp.T));
  out.theta_history.push_back(theta);  // theta_0 is always stored

  std::vector<double> pair_readout(static_cast<std::size_t>(hp.N));
  std::vector<int> bits(static_cast<std::size_t>(hp.M));

  for (int t = 0; t < hp.T; ++t) {
    const auto iter_start = std::chrono::steady_clock::now();
    RngStream dir_rng =
        family.stream(streams::kDirection, static_cast<std::uint64_t>(t));
    const DirectionSample dir =
        alg == Algorithm::kZpg
            ? sample_sphere_direction(d, dir_rng)
            : sample_block_direction(d, hp.K, dir_rng);
    const ParamVector theta_perturbed = perturbed(theta, hp.mu, dir.v);

    double readout;
    if (hp.diagnostic_mode) {
      // Exact value-difference oracle in place of the preference channel:
      // isolates direction-sampling effects from estimation noise.
      readout =
          exact_value(env, policy, theta_perturbed, hp.enumeration_cap) -
          exact_value(env, policy, theta, hp.enumeration_cap);
    } else {
      // Each pair owns pre-split streams, so evaluation order is free; the
      // reduction below is in pair-index order, which pins the float sum.
      for (int n = 0; n < hp.N; ++n) {
        RngStream base_rng = family.stream(streams::kTrajectoryBase,
                                           static_cast<std::uint64_t>(t),
                                           static_cast<std::uint64_t>(n));
        RngStream pert_rng = family.stream(streams::kTrajectoryPerturbed,
                                           static_cast<std::uint64_t>(t),
                                           static_cast<std::uint64_t>(n));
        RngStream feedback_rng = family.stream(streams::kFeedback,
                                               static_cast<std::uint64_t>(t),
                                               static_cast<std::uint64_t>(n));
        const Trajectory tau0 = sample_trajectory(env, policy, theta, base_rng);
        const Trajectory tau1 =
            sample_trajectory(env, policy, theta_perturbed, pert_rng);
        const double r0 = env.trajectory_reward(tau0);
        const double r1 = env.trajectory_reward(tau1);
        for (int m = 0; m < hp.M; ++m) {
          bits[static_cast<std::size_t>(m)] =
              sample_feedback(sigma, r1, r0, feedback_rng);
        }
        const PreferenceEstimate est =
            estimate_preference(bits, resolved.delta);
        pair_readout[static_cast<std::size_t>(n)] = sigma.inverse(est.p_hat);
      }
      double sum = 0.0;
      for (int n = 0; n < hp.N; ++n) {
        sum += pair_readout[static_cast<std::size_t>(n)];
      }
      readout = sum / static_cast<double>(hp.N);
    }

    const std::vector<double> grad = gradient_estimate(d, hp.mu, readout, dir);
    double norm_sq = 0.0;
    for (double g : grad) norm_sq += g * g;

    IterationRecord rec;
    rec.t = t;
    rec.value_readout = readout;
    rec.grad_est_norm = std::sqrt(norm_sq);
    rec.queries_cum =
        hp.diagnostic_mode
            ? 0
            : static_cast<std::int64_t>(t + 1) * hp.N * hp.M;
    rec.theta_index = (t % stride == 0) ? t / stride : -1;
    if (hp.record_timing) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - iter_start)
                        .count();
    }
    out.records.push_back(rec);

    for (int i = 0; i < d; ++i) {
      theta[static_cast<std::size_t>(i)] +=
          hp.alpha * grad[static_cast<std::size_t>(i)];
    }
    if ((t + 1) % stride == 0 && t + 1 < hp.T) {
      out.theta_history.push_back(theta);
    }
  }

  out.theta_final = theta;
  out.total_queries = hp.diagnostic_mode
                          ? 0
                          : static_cast<std::int64_t>(hp.T) * hp.N * hp.M;

  RngStream select_rng = family.stream(streams::kIterateSelect);
  out.theta_r_index = static_cast<int>(select_rng.uniform_below(
      static_cast<std::uint64_t>(out.theta_history.size())));
  out.theta_r = out.theta_history[static_cast<std::size_t>(out.theta_r_index)];
  return out;
}

}  // namespace

HyperConstants default_constants(Algorithm alg) {
  if (alg == Algorithm::kZpg) return {9.0, 4.0, 12.0};
  return {4.0, 1.0 / 3.0, 12.0};
}

MuAlpha default_hyperparams(Algorithm alg, int d, double horizon_bound,
                            double lipschitz, double m_bits, double n_pairs,
                            std::optional<HyperConstants> constants) {
  require(d >= 1, "default_hyperparams: d must be >= 1");
  require(horizon_bound > 0.0, "default_hyperparams: horizon bound must be positive");
  require(lipschitz > 0.0, "default_hyperparams: L must be positive");
  require(m_bits >= 1.0, "default_hyperparams: M must be >= 1");
  require(n_pairs >= 1.0, "default_hyperparams: N must be >= 1");

  const HyperConstants c = constants.value_or(default_constants(alg));
  require(c.mu_pref_coeff > 0.0 && c.mu_value_coeff > 0.0 && c.alpha_denom > 0.0,
          "default_hyperparams: constants must be positive");

  const double pref_branch =
      c.mu_pref_coeff * std::sqrt(std::log(m_bits) / m_bits);
  const double value_branch =
      c.mu_value_coeff * horizon_bound /
      (lipschitz * std::sqrt(static_cast<double>(d) * n_pairs));
  MuAlpha out;
  out.mu = std::sqrt(std::max(pref_branch, value_branch));
  out.alpha = 1.0 / (c.alpha_denom * static_cast<double>(d) * lipschitz);
  return out;
}

OptResult zpg_run(const EnvModel& env, const PolicyModel& policy,
                  const LinkFunction& sigma, const HyperParams& hp,
                  ParamVector theta0) {
  return run_impl(Algorithm::kZpg, env, policy, sigma, hp, std::move(theta0));
}

OptResult zbcpg_run(const EnvModel& env, const PolicyModel& policy,
                    const LinkFunction& sigma, const HyperParams& hp,
                    ParamVector theta0) {
  return run_impl(Algorithm::kZbcpg, env, policy, sigma, hp,
                  std::move(theta0));
}

const ParamVector& select_uniform_iterate(
    const std::vector<ParamVector>& history, RngStream& rng) {
  if (history.empty()) {
    throw ConfigError("select_uniform_iterate: history must be non-empty");
  }
  return history[static_cast<std::size_t>(
      rng.uniform_below(static_cast<std::uint64_t>(history.size())))];
}

}  // namespace prefgrad
