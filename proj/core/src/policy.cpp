#include "prefgrad/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prefgrad/errors.hpp"

namespace prefgrad {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

PolicyModel::PolicyModel(PolicyKind kind, int num_states, int num_actions,
                         int horizon, int dim, std::vector<double> features)
    : kind_(kind),
      num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      dim_(dim),
      features_(std::move(features)) {
  require(num_states_ >= 1, "policy: num_states must be >= 1");
  require(num_actions_ >= 1, "policy: num_actions must be >= 1");
  require(horizon_ >= 1, "policy: horizon must be >= 1");
  require(dim_ >= 1, "policy: dim must be >= 1");
  if (kind_ == PolicyKind::kLinearSoftmax) {
    const std::size_t cols = static_cast<std::size_t>(horizon_) * num_states_ *
                             num_actions_;
    require(features_.size() == cols * static_cast<std::size_t>(dim_),
            "policy: features must have dim rows of horizon*|S|*|A| columns");
    for (double f : features_) {
      require(std::isfinite(f), "policy: features must be finite");
    }
  }
}

PolicyModel PolicyModel::tabular(int num_states, int num_actions,
                                 int horizon) {
  return PolicyModel(PolicyKind::kTabular, num_states, num_actions, horizon,
                     horizon * num_states * num_actions, {});
}

PolicyModel PolicyModel::linear(int num_states, int num_actions, int horizon,
                                int dim, std::vector<double> features) {
  return PolicyModel(PolicyKind::kLinearSoftmax, num_states, num_actions,
                     horizon, dim, std::move(features));
}

void PolicyModel::action_distribution(const ParamVector& theta, int s, int h,
                                      std::span<double> out) const {
  require(theta.size() == static_cast<std::size_t>(dim_),
          "policy: theta has dimension " + std::to_string(theta.size()) +
              ", expected " + std::to_string(dim_));
  require(s >= 0 && s < num_states_, "policy: state index out of range");
  require(h >= 0 && h < horizon_, "policy: step index out of range");
  require(out.size() == static_cast<std::size_t>(num_actions_),
          "policy: output span must have |A| entries");

  // Logits for each action, then softmax with max subtraction.
  if (kind_ == PolicyKind::kTabular) {
    const int base = flat_index(h, s, 0);
    for (int a = 0; a < num_actions_; ++a) out[a] = theta[base + a];
  } else {
    const std::size_t cols = static_cast<std::size_t>(horizon_) * num_states_ *
                             num_actions_;
    for (int a = 0; a < num_actions_; ++a) {
      const std::size_t col = static_cast<std::size_t>(flat_index(h, s, a));
      double logit = 0.0;
      for (int j = 0; j < dim_; ++j) {
        logit += theta[j] * features_[static_cast<std::size_t>(j) * cols + col];
      }
      out[a] = logit;
    }
  }

  const double max_logit = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (int a = 0; a < num_actions_; ++a) {
    out[a] = std::exp(out[a] - max_logit);
    sum += out[a];
  }
  for (int a = 0; a < num_actions_; ++a) out[a] /= sum;
}

std::vector<double> PolicyModel::action_distribution(const ParamVector& theta,
                                                     int s, int h) const {
  std::vector<double> out(num_actions_);
  action_distribution(theta, s, h, out);
  return out;
}

ParamVector perturbed(const ParamVector& theta, double mu,
                      std::span<const double> v) {
  if (theta.size() != v.size()) {
    throw ConfigError("perturbed: theta and direction sizes differ");
  }
  ParamVector out(theta);
  if (mu == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += mu * v[i];
  return out;
}

}  // namespace prefgrad
