#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefgrad/env.hpp"
#include "prefgrad/policy.hpp"
#include "prefgrad/preference.hpp"
#include "prefgrad/rng.hpp"

namespace prefgrad {

enum class Algorithm { kZpg, kZbcpg };

/// Constants in the default step-size and smoothing-radius formulas; the
/// defaults are the exact constants the convergence analysis prescribes.
/// mu^2 = max{mu_pref_coeff * sqrt(log M / M),
///            mu_value_coeff * B / (L * sqrt(d N))},
/// alpha = 1 / (alpha_denom * d * L).
struct HyperConstants {
  double mu_pref_coeff;
  double mu_value_coeff;
  double alpha_denom;
};

HyperConstants default_constants(Algorithm alg);  // {9, 4, 12} / {4, 1/3, 12}

struct MuAlpha {
  double mu;
  double alpha;
};

/// Default smoothing radius and step size for dimension d, reward scale
/// B = horizon bound, declared constant L, M feedback bits per pair, and N
/// pairs per iteration. Counts are doubles so the formulas can be probed at
/// non-integer points.
MuAlpha default_hyperparams(Algorithm alg, int d, double horizon_bound,
                            double lipschitz, double m_bits, double n_pairs,
                            std::optional<HyperConstants> constants = {});

struct HyperParams {
  int T = 0;            // iterations (0 is allowed: no updates)
  int N = 1;            // trajectory pairs per iteration
  int M = 1;            // feedback bits per pair
  double mu = 0.0;      // smoothing radius, > 0
  double alpha = 0.0;   // step size, > 0
  int K = 0;            // block size (ZBCPG only), in [1, d]
  double delta = -1.0;  // trim level; < 0 resolves to the link default
  double L = 1.0;       // declared smoothness / inverse-link Lipschitz bound
  std::uint64_t seed = 0;
  int history_stride = 0;        // 0: full while d * T <= 1e6, else strided
  bool diagnostic_mode = false;  // exact value-difference readout, no queries
  bool record_timing = false;    // fill IterationRecord::wall_ms (wall-clock
                                 // times are inherently run-dependent)
  double enumeration_cap = kDefaultEnumerationCap;
};

/// Per-iteration log. t is the 0-based iteration index; the iterate the
/// gradient was estimated at is theta_history[theta_index] when the history
/// stride kept it (theta_index is -1 otherwise). queries_cum counts feedback
/// bits consumed through the end of this iteration: (t + 1) * N * M, or 0 in
/// diagnostic mode.
struct IterationRecord {
  int t = 0;
  double value_readout = 0.0;
  double grad_est_norm = 0.0;
  std::int64_t queries_cum = 0;
  int theta_index = -1;
  double wall_ms = 0.0;  // stays 0 unless HyperParams::record_timing
};

struct OptResult {
  std::vector<IterationRecord> records;
  std::vector<ParamVector> theta_history;  // theta_0, theta_s, theta_2s, ...
  int history_stride = 1;
  ParamVector theta_final;   // theta_T, after the last update
  ParamVector theta_r;       // uniformly selected stored pre-update iterate
  int theta_r_index = 0;     // index into theta_history
  std::int64_t total_queries = 0;
  std::vector<std::string> warnings;
};

/// Zeroth-order policy gradient with unit-sphere perturbations. Per
/// iteration: one direction v_t, N pairs (base rollout, perturbed rollout),
/// M feedback bits per pair; the readout is the mean inverse-link trimmed
/// preference, the gradient estimate (d / mu) * readout * v_t, and the update
/// theta += alpha * grad. theta0 empty means zeros (the uniform policy).
OptResult zpg_run(const EnvModel& env, const PolicyModel& policy,
                  const LinkFunction& sigma, const HyperParams& hp,
                  ParamVector theta0 = {});

/// Same loop with block-coordinate directions of size K.
OptResult zbcpg_run(const EnvModel& env, const PolicyModel& policy,
                    const LinkFunction& sigma, const HyperParams& hp,
                    ParamVector theta0 = {});

/// Uniform draw from a non-empty iterate history.
const ParamVector& select_uniform_iterate(
    const std::vector<ParamVector>& history, RngStream& rng);

}  // namespace prefgrad
