#pragma once

#include <span>
#include <vector>

namespace prefgrad {

/// Policy parameters. Entries must be finite; dimension is fixed by the
/// policy model that owns it.
using ParamVector = std::vector<double>;

enum class PolicyKind { kTabular, kLinearSoftmax };

/// Softmax policy over a finite episodic layout (horizon H, |S| states, |A|
/// actions). Logits are either one free parameter per (step, state, action)
/// triple, or linear in a user-supplied feature table.
///
/// Steps are 0-based internally: h in [0, H). Triples flatten as
/// flat_index(h, s, a) = (h * |S| + s) * |A| + a, and the tabular parameter
/// vector as well as the columns of a linear feature table follow this order.
class PolicyModel {
 public:
  static PolicyModel tabular(int num_states, int num_actions, int horizon);

  /// features is row-major with shape [dim][H * |S| * |A|]; the logit of
  /// (h, s, a) is the inner product of theta with column flat_index(h, s, a).
  static PolicyModel linear(int num_states, int num_actions, int horizon,
                            int dim, std::vector<double> features);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int horizon() const { return horizon_; }
  int dim() const { return dim_; }
  PolicyKind kind() const { return kind_; }

  int flat_index(int h, int s, int a) const {
    return (h * num_states_ + s) * num_actions_ + a;
  }

  /// Writes the action distribution at (state s, step h) into out
  /// (size |A|). Softmax with max subtraction: entries are strictly positive
  /// and sum to 1 within 1e-12 for any finite theta.
  void action_distribution(const ParamVector& theta, int s, int h,
                           std::span<double> out) const;

  std::vector<double> action_distribution(const ParamVector& theta, int s,
                                          int h) const;

 private:
  PolicyModel(PolicyKind kind, int num_states, int num_actions, int horizon,
              int dim, std::vector<double> features);

  PolicyKind kind_;
  int num_states_, num_actions_, horizon_, dim_;
  std::vector<double> features_;  // empty for tabular
};

/// theta + mu * v, elementwise. Sizes must match; mu = 0 returns theta
/// exactly.
ParamVector perturbed(const ParamVector& theta, double mu,
                      std::span<const double> v);

}  // namespace prefgrad
