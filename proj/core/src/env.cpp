#include "prefgrad/env.hpp"

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>

#include "json_util.hpp"
#include "prefgrad/errors.hpp"

namespace prefgrad {

namespace {

constexpr double kRowSumTol = 1e-12;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// Validates a probability row: entries in [0, 1], sum within kRowSumTol of 1.
// Rows that fail are refused outright, never renormalized.
void check_distribution(std::span<const double> row, const std::string& what) {
  double sum = 0.0;
  for (double p : row) {
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0,
            what + ": entries must lie in [0, 1]");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= kRowSumTol,
          what + ": row sums to " + std::to_string(sum) +
              ", must be 1 within 1e-12 (renormalization is refused)");
}

int draw_categorical(std::span<const double> probs, RngStream& rng) {
  const double u = rng.uniform01();
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  // u fell into the rounding gap below 1; attribute it to the last
  // positive-probability entry.
  return last_positive;
}

}  // namespace

EnvModel::EnvModel(int num_states, int num_actions, int horizon,
                   std::vector<double> transitions,
                   std::vector<double> initial_dist, RewardSpec reward)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      transitions_(std::move(transitions)),
      initial_dist_(std::move(initial_dist)),
      reward_(std::move(reward)) {
  require(num_states_ >= 1, "env: num_states must be >= 1");
  require(num_actions_ >= 1, "env: num_actions must be >= 1");
  require(horizon_ >= 1, "env: horizon must be >= 1");

  const std::size_t rows = static_cast<std::size_t>(horizon_) * num_states_ *
                           num_actions_;
  require(transitions_.size() == rows * static_cast<std::size_t>(num_states_),
          "env: transitions must have horizon*|S|*|A| rows of |S| entries");
  require(initial_dist_.size() == static_cast<std::size_t>(num_states_),
          "env: initial_dist must have |S| entries");

  check_distribution(initial_dist_, "env initial_dist");
  for (int h = 0; h < horizon_; ++h) {
    for (int s = 0; s < num_states_; ++s) {
      for (int a = 0; a < num_actions_; ++a) {
        check_distribution(
            transition_row(h, s, a),
            "env transitions[h=" + std::to_string(h) + "][s=" +
                std::to_string(s) + "][a=" + std::to_string(a) + "]");
      }
    }
  }

  if (reward_.kind == RewardKind::kAdditive) {
    require(reward_.table.size() == rows,
            "env: additive reward table must have horizon*|S|*|A| entries");
    for (double r : reward_.table) {
      require(std::isfinite(r) && r >= 0.0 && r <= 1.0,
              "env: additive per-step rewards must lie in [0, 1]");
    }
  } else {
    require(reward_.table.empty(), "env: coverage reward takes no table");
  }
}

std::span<const double> EnvModel::transition_row(int h, int s, int a) const {
  const std::size_t row =
      (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
  return std::span<const double>(transitions_.data() + row * num_states_,
                                 static_cast<std::size_t>(num_states_));
}

double EnvModel::step_reward(int h, int s, int a) const {
  if (reward_.kind != RewardKind::kAdditive) {
    throw ConfigError("env: step_reward is only defined for additive rewards");
  }
  const std::size_t idx =
      (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
  return reward_.table[idx];
}

double EnvModel::trajectory_reward(const Trajectory& tau) const {
  if (tau.steps.size() != static_cast<std::size_t>(horizon_)) {
    throw ConfigError("trajectory_reward: trajectory length differs from horizon");
  }
  for (const auto& [s, a] : tau.steps) {
    if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_) {
      throw ConfigError("trajectory_reward: state or action out of range");
    }
  }

  if (reward_.kind == RewardKind::kAdditive) {
    double total = 0.0;
    for (int h = 0; h < horizon_; ++h) {
      total += step_reward(h, tau.steps[h].first, tau.steps[h].second);
    }
    return total;
  }

  // Coverage: horizon * (distinct states visited) / |S|.
  std::vector<char> seen(static_cast<std::size_t>(num_states_), 0);
  int distinct = 0;
  for (const auto& [s, a] : tau.steps) {
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = 1;
      ++distinct;
    }
  }
  return static_cast<double>(horizon_) * distinct / num_states_;
}

Trajectory sample_trajectory(const EnvModel& env, const PolicyModel& policy,
                             const ParamVector& theta, RngStream& rng) {
  require(policy.num_states() == env.num_states() &&
              policy.num_actions() == env.num_actions() &&
              policy.horizon() == env.horizon(),
          "sample_trajectory: policy and env shapes differ");

  Trajectory tau;
  tau.steps.resize(static_cast<std::size_t>(env.horizon()));
  std::vector<double> dist(static_cast<std::size_t>(env.num_actions()));

  int s = draw_categorical(env.initial_dist(), rng);
  for (int h = 0; h < env.horizon(); ++h) {
    policy.action_distribution(theta, s, h, dist);
    const int a = draw_categorical(dist, rng);
    tau.steps[static_cast<std::size_t>(h)] = {s, a};
    if (h + 1 < env.horizon()) {
      s = draw_categorical(env.transition_row(h, s, a), rng);
    }
  }
  return tau;
}

namespace {

// Depth-first enumeration of all positive-probability trajectories,
// accumulating probability * trajectory_reward. Handles both reward kinds.
struct Enumerator {
  const EnvModel& env;
  const std::vector<double>& policy_table;  // [h][s][a]
  Trajectory tau;
  double total = 0.0;

  double policy_prob(int h, int s, int a) const {
    const std::size_t idx =
        (static_cast<std::size_t>(h) * env.num_states() + s) *
            env.num_actions() +
        a;
    return policy_table[idx];
  }

  void walk(int h, int s, double weight) {
    for (int a = 0; a < env.num_actions(); ++a) {
      const double w = weight * policy_prob(h, s, a);
      if (w == 0.0) continue;
      tau.steps[static_cast<std::size_t>(h)] = {s, a};
      if (h + 1 == env.horizon()) {
        total += w * env.trajectory_reward(tau);
      } else {
        const auto row = env.transition_row(h, s, a);
        for (int s2 = 0; s2 < env.num_states(); ++s2) {
          if (row[static_cast<std::size_t>(s2)] > 0.0) {
            walk(h + 1, s2, w * row[static_cast<std::size_t>(s2)]);
          }
        }
      }
    }
  }
};

std::vector<double> tabulate_policy(const EnvModel& env,
                                    const PolicyModel& policy,
                                    const ParamVector& theta) {
  require(policy.num_states() == env.num_states() &&
              policy.num_actions() == env.num_actions() &&
              policy.horizon() == env.horizon(),
          "value oracle: policy and env shapes differ");
  std::vector<double> table(static_cast<std::size_t>(env.horizon()) *
                            env.num_states() * env.num_actions());
  std::vector<double> dist(static_cast<std::size_t>(env.num_actions()));
  for (int h = 0; h < env.horizon(); ++h) {
    for (int s = 0; s < env.num_states(); ++s) {
      policy.action_distribution(theta, s, h, dist);
      const std::size_t base =
          (static_cast<std::size_t>(h) * env.num_states() + s) *
          env.num_actions();
      for (int a = 0; a < env.num_actions(); ++a) {
        table[base + static_cast<std::size_t>(a)] =
            dist[static_cast<std::size_t>(a)];
      }
    }
  }
  return table;
}

}  // namespace

double exact_value(const EnvModel& env, const PolicyModel& policy,
                   const ParamVector& theta, double cap) {
  const double per_step =
      static_cast<double>(env.num_states()) * env.num_actions();
  const double path_count = std::pow(per_step, env.horizon());
  if (!(path_count <= cap)) {
    std::ostringstream msg;
    msg << "exact_value: (|S|*|A|)^horizon = " << path_count
        << " exceeds the enumeration cap " << cap;
    throw InfeasibleError(msg.str());
  }

  const std::vector<double> table = tabulate_policy(env, policy, theta);
  Enumerator e{env, table, Trajectory{}, 0.0};
  e.tau.steps.resize(static_cast<std::size_t>(env.horizon()));
  const auto mu0 = env.initial_dist();
  for (int s = 0; s < env.num_states(); ++s) {
    if (mu0[static_cast<std::size_t>(s)] > 0.0) {
      e.walk(0, s, mu0[static_cast<std::size_t>(s)]);
    }
  }
  return e.total;
}

double dp_value(const EnvModel& env, const PolicyModel& policy,
                const ParamVector& theta) {
  if (env.reward_kind() != RewardKind::kAdditive) {
    throw ConfigError("dp_value: requires an additive reward");
  }
  const std::vector<double> table = tabulate_policy(env, policy, theta);

  // Backward induction: values[s] holds the optimal-free policy value from
  // step h onward.
  std::vector<double> values(static_cast<std::size_t>(env.num_states()), 0.0);
  std::vector<double> next(values);
  for (int h = env.horizon() - 1; h >= 0; --h) {
    for (int s = 0; s < env.num_states(); ++s) {
      double v = 0.0;
      for (int a = 0; a < env.num_actions(); ++a) {
        const std::size_t idx =
            (static_cast<std::size_t>(h) * env.num_states() + s) *
                env.num_actions() +
            a;
        double future = 0.0;
        if (h + 1 < env.horizon()) {
          const auto row = env.transition_row(h, s, a);
          for (int s2 = 0; s2 < env.num_states(); ++s2) {
            future += row[static_cast<std::size_t>(s2)] *
                      next[static_cast<std::size_t>(s2)];
          }
        }
        v += table[idx] * (env.step_reward(h, s, a) + future);
      }
      values[static_cast<std::size_t>(s)] = v;
    }
    next = values;
  }

  double total = 0.0;
  const auto mu0 = env.initial_dist();
  for (int s = 0; s < env.num_states(); ++s) {
    total += mu0[static_cast<std::size_t>(s)] *
             values[static_cast<std::size_t>(s)];
  }
  return total;
}

EnvModel load_env_json(const std::string& text) {
  namespace ju = jsonutil;
  const ju::json root = ju::parse(text, "env");

  // Shorthand for the bundled environments:
  //   {"builtin": "bandit", "arm_rewards": [...]}
  //   {"builtin": "chain"|"coverage_chain", "num_states": S, "horizon": H,
  //    "slip": w}
  //   {"builtin": "windy_grid", "wind": w}
  if (root.is_object() && root.contains("builtin")) {
    const std::string which =
        ju::get_string(ju::member(root, "env", "builtin"), "env.builtin");
    if (which == "bandit") {
      return make_bandit(ju::get_number_array(
          ju::member(root, "env", "arm_rewards"), "env.arm_rewards"));
    }
    if (which == "chain" || which == "coverage_chain") {
      const int num_states = static_cast<int>(ju::get_integer(
          ju::member(root, "env", "num_states"), "env.num_states"));
      const int horizon = static_cast<int>(ju::get_integer(
          ju::member(root, "env", "horizon"), "env.horizon"));
      double slip = 0.0;
      if (const ju::json* s = ju::member_opt(root, "env", "slip")) {
        slip = ju::get_number(*s, "env.slip");
      }
      return which == "chain" ? make_chain(num_states, horizon, slip)
                              : make_coverage_chain(num_states, horizon, slip);
    }
    if (which == "windy_grid") {
      double wind = 0.1;
      if (const ju::json* w = ju::member_opt(root, "env", "wind")) {
        wind = ju::get_number(*w, "env.wind");
      }
      return make_windy_grid(wind);
    }
    throw ConfigError(
        "'env.builtin' must be one of \"bandit\", \"chain\", "
        "\"windy_grid\", \"coverage_chain\"");
  }

  return [&root]() {
    const std::string path = "env";
    const int num_states = static_cast<int>(
        ju::get_integer(ju::member(root, path, "num_states"), path + ".num_states"));
    const int num_actions = static_cast<int>(ju::get_integer(
        ju::member(root, path, "num_actions"), path + ".num_actions"));
    const int horizon = static_cast<int>(
        ju::get_integer(ju::member(root, path, "horizon"), path + ".horizon"));
    if (num_states < 1 || num_actions < 1 || horizon < 1) {
      throw ConfigError("'env': num_states, num_actions, horizon must be >= 1");
    }

    // transitions: [h][s][a][s'] as nested arrays.
    const ju::json& trans = ju::get_array(
        ju::member(root, path, "transitions"), path + ".transitions");
    if (trans.size() != static_cast<std::size_t>(horizon)) {
      throw ConfigError("'env.transitions' must have horizon entries");
    }
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(horizon) * num_states * num_actions *
                 num_states);
    for (int h = 0; h < horizon; ++h) {
      const std::string hp = path + ".transitions[" + std::to_string(h) + "]";
      const ju::json& by_state = ju::get_array(trans[h], hp);
      if (by_state.size() != static_cast<std::size_t>(num_states)) {
        throw ConfigError(ju::quote(hp) + " must have |S| entries");
      }
      for (int s = 0; s < num_states; ++s) {
        const std::string sp = hp + "[" + std::to_string(s) + "]";
        const ju::json& by_action = ju::get_array(by_state[s], sp);
        if (by_action.size() != static_cast<std::size_t>(num_actions)) {
          throw ConfigError(ju::quote(sp) + " must have |A| entries");
        }
        for (int a = 0; a < num_actions; ++a) {
          const std::string ap = sp + "[" + std::to_string(a) + "]";
          std::vector<double> row = ju::get_number_array(by_action[a], ap);
          if (row.size() != static_cast<std::size_t>(num_states)) {
            throw ConfigError(ju::quote(ap) + " must have |S| entries");
          }
          flat.insert(flat.end(), row.begin(), row.end());
        }
      }
    }

    std::vector<double> initial = ju::get_number_array(
        ju::member(root, path, "initial_dist"), path + ".initial_dist");

    const ju::json& reward = ju::member(root, path, "reward");
    const std::string rkind = ju::get_string(
        ju::member(reward, path + ".reward", "kind"), path + ".reward.kind");
    RewardSpec spec;
    if (rkind == "additive") {
      spec.kind = RewardKind::kAdditive;
      const ju::json& tbl = ju::get_array(
          ju::member(reward, path + ".reward", "table"), path + ".reward.table");
      if (tbl.size() != static_cast<std::size_t>(horizon)) {
        throw ConfigError("'env.reward.table' must have horizon entries");
      }
      for (int h = 0; h < horizon; ++h) {
        const std::string hp =
            path + ".reward.table[" + std::to_string(h) + "]";
        const ju::json& by_state = ju::get_array(tbl[h], hp);
        if (by_state.size() != static_cast<std::size_t>(num_states)) {
          throw ConfigError(ju::quote(hp) + " must have |S| entries");
        }
        for (int s = 0; s < num_states; ++s) {
          const std::string sp = hp + "[" + std::to_string(s) + "]";
          std::vector<double> row = ju::get_number_array(by_state[s], sp);
          if (row.size() != static_cast<std::size_t>(num_actions)) {
            throw ConfigError(ju::quote(sp) + " must have |A| entries");
          }
          spec.table.insert(spec.table.end(), row.begin(), row.end());
        }
      }
    } else if (rkind == "coverage") {
      spec.kind = RewardKind::kCoverage;
    } else {
      throw ConfigError("'env.reward.kind' must be \"additive\" or \"coverage\"");
    }

    return EnvModel(num_states, num_actions, horizon, std::move(flat),
                    std::move(initial), std::move(spec));
  }();
}

EnvModel load_env_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("env: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_env_json(buf.str());
}

EnvModel make_bandit(const std::vector<double>& arm_rewards) {
  const int num_actions = static_cast<int>(arm_rewards.size());
  require(num_actions >= 1, "make_bandit: at least one arm required");
  std::vector<double> transitions(static_cast<std::size_t>(num_actions), 1.0);
  RewardSpec reward;
  reward.table = arm_rewards;
  return EnvModel(1, num_actions, 1, std::move(transitions), {1.0},
                  std::move(reward));
}

EnvModel make_chain(int num_states, int horizon, double slip) {
  require(num_states >= 2, "make_chain: num_states must be >= 2");
  require(slip >= 0.0 && slip <= 1.0, "make_chain: slip must lie in [0, 1]");
  const int num_actions = 2;

  std::vector<double> transitions(
      static_cast<std::size_t>(horizon) * num_states * num_actions *
          num_states,
      0.0);
  std::vector<double> reward_table(
      static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0);
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        const std::size_t row =
            ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
            num_states;
        const int forward = std::min(num_states - 1, s + 1);
        const int backward = std::max(0, s - 1);
        const int intended = (a == 1) ? forward : backward;
        const int slipped = (a == 1) ? backward : forward;
        transitions[row + static_cast<std::size_t>(intended)] += 1.0 - slip;
        transitions[row + static_cast<std::size_t>(slipped)] += slip;
        reward_table[(static_cast<std::size_t>(h) * num_states + s) *
                         num_actions +
                     a] = static_cast<double>(s) / (num_states - 1);
      }
    }
  }

  std::vector<double> initial(static_cast<std::size_t>(num_states), 0.0);
  initial[0] = 1.0;
  RewardSpec reward;
  reward.table = std::move(reward_table);
  return EnvModel(num_states, num_actions, horizon, std::move(transitions),
                  std::move(initial), std::move(reward));
}

EnvModel make_windy_grid(double wind) {
  require(wind >= 0.0 && wind <= 1.0, "make_windy_grid: wind must lie in [0, 1]");
  const int num_states = 4;  // cell = 2 * row + col on a 2x2 grid
  const int num_actions = 2;
  const int horizon = 3;

  std::vector<double> transitions(static_cast<std::size_t>(horizon) *
                                      num_states * num_actions * num_states,
                                  0.0);
  std::vector<double> reward_table(
      static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0);
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      const int row_pos = s / 2;
      const int col_pos = s % 2;
      for (int a = 0; a < num_actions; ++a) {
        const int new_row = std::min(1, row_pos + (a == 1));
        const int moved_col = std::min(1, col_pos + (a == 0));
        const int pushed_col = std::min(1, moved_col + 1);
        const std::size_t row =
            ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
            num_states;
        transitions[row + static_cast<std::size_t>(2 * new_row + moved_col)] +=
            1.0 - wind;
        transitions[row + static_cast<std::size_t>(2 * new_row + pushed_col)] +=
            wind;
        reward_table[(static_cast<std::size_t>(h) * num_states + s) *
                         num_actions +
                     a] = (s == 3) ? 1.0 : 0.0;
      }
    }
  }

  std::vector<double> initial(static_cast<std::size_t>(num_states), 0.0);
  initial[0] = 1.0;
  RewardSpec reward;
  reward.table = std::move(reward_table);
  return EnvModel(num_states, num_actions, horizon, std::move(transitions),
                  std::move(initial), std::move(reward));
}

EnvModel make_coverage_chain(int num_states, int horizon, double slip) {
  EnvModel additive = make_chain(num_states, horizon, slip);
  std::vector<double> transitions;
  transitions.reserve(static_cast<std::size_t>(horizon) * num_states * 2 *
                      num_states);
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < 2; ++a) {
        const auto row = additive.transition_row(h, s, a);
        transitions.insert(transitions.end(), row.begin(), row.end());
      }
    }
  }
  std::vector<double> initial(additive.initial_dist().begin(),
                              additive.initial_dist().end());
  RewardSpec reward;
  reward.kind = RewardKind::kCoverage;
  return EnvModel(num_states, 2, horizon, std::move(transitions),
                  std::move(initial), std::move(reward));
}

}  // namespace prefgrad
