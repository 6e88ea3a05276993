#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prefgrad/policy.hpp"
#include "prefgrad/rng.hpp"

namespace prefgrad {

/// One episode: (state, action) per step, length equal to the horizon.
struct Trajectory {
  std::vector<std::pair<int, int>> steps;
};

enum class RewardKind { kAdditive, kCoverage };

/// Trajectory reward specification. Additive: per-step table r_h(s, a) with
/// entries in [0, 1], flattened [h][s][a], so total reward lies in
/// [0, horizon]. Coverage: horizon * (distinct states visited) / |S|, a
/// deliberately non-additive reward on the same [0, horizon] scale.
struct RewardSpec {
  RewardKind kind = RewardKind::kAdditive;
  std::vector<double> table;  // empty for coverage
};

/// Finite episodic MDP with step-indexed transition kernels. Immutable after
/// construction; construction validates shapes, row-stochasticity (each row
/// must sum to 1 within 1e-12; renormalization is refused), and reward range.
class EnvModel {
 public:
  EnvModel(int num_states, int num_actions, int horizon,
           std::vector<double> transitions,  // [h][s][a][s'] flattened
           std::vector<double> initial_dist, RewardSpec reward);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int horizon() const { return horizon_; }
  RewardKind reward_kind() const { return reward_.kind; }

  std::span<const double> transition_row(int h, int s, int a) const;
  std::span<const double> initial_dist() const { return initial_dist_; }
  double step_reward(int h, int s, int a) const;  // additive kind only

  /// Total reward of a trajectory that is shape-valid for this model.
  double trajectory_reward(const Trajectory& tau) const;

 private:
  int num_states_, num_actions_, horizon_;
  std::vector<double> transitions_;
  std::vector<double> initial_dist_;
  RewardSpec reward_;
};

/// One rollout of the policy in the environment, consuming only the given
/// stream. Draw order is fixed: initial state, then action and (except at the
/// last step) next state for each step.
Trajectory sample_trajectory(const EnvModel& env, const PolicyModel& policy,
                             const ParamVector& theta, RngStream& rng);

inline constexpr double kDefaultEnumerationCap = 1e6;

/// Exact policy value by full trajectory enumeration. Refuses (with
/// InfeasibleError naming the cap) when (|S| * |A|)^horizon exceeds cap.
/// Works for both reward kinds; this is the ground-truth oracle the
/// diagnostics are built on.
double exact_value(const EnvModel& env, const PolicyModel& policy,
                   const ParamVector& theta,
                   double cap = kDefaultEnumerationCap);

/// Exact policy value by backward induction. Additive rewards only
/// (ConfigError otherwise); must agree with exact_value to 1e-10.
double dp_value(const EnvModel& env, const PolicyModel& policy,
                const ParamVector& theta);

EnvModel load_env_json(const std::string& text);
EnvModel load_env_file(const std::string& path);

// Bundled testbed environments.

/// Single-state bandit: horizon 1, one arm per action, additive rewards given
/// per arm (each in [0, 1]).
EnvModel make_bandit(const std::vector<double>& arm_rewards);

/// Random-walk chain: states 0..num_states-1, start at 0, actions {0: left,
/// 1: right} moving one state with clamping at the ends; with probability
/// slip the move goes the opposite way. Additive reward s / (num_states - 1)
/// at every step.
EnvModel make_chain(int num_states, int horizon, double slip);

/// 2x2 grid, start at cell 0, actions {0: right, 1: down}; after the intended
/// move, wind pushes one extra column right with probability wind. Additive
/// reward 1 when acting from the far corner (cell 3), else 0. Horizon 3.
EnvModel make_windy_grid(double wind);

/// Same kernel as make_chain but with the coverage reward.
EnvModel make_coverage_chain(int num_states, int horizon, double slip);

}  // namespace prefgrad
