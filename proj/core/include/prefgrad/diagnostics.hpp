#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "prefgrad/env.hpp"
#include "prefgrad/policy.hpp"
#include "prefgrad/preference.hpp"

namespace prefgrad {

/// Central finite differences: g_i = (f(theta + h e_i) - f(theta - h e_i))
/// / (2 h). The functional form exists so tests can probe arbitrary smooth
/// objectives; the env overload differentiates the exact policy value.
std::vector<double> finite_diff_gradient(
    const std::function<double(const ParamVector&)>& f,
    const ParamVector& theta, double h = 1e-5);

std::vector<double> finite_diff_gradient(const EnvModel& env,
                                         const PolicyModel& policy,
                                         const ParamVector& theta,
                                         double h = 1e-5,
                                         double cap = kDefaultEnumerationCap);

/// Squared Euclidean norm of the finite-difference value gradient: the
/// quantity the convergence guarantees bound.
double stationarity_metric(const EnvModel& env, const PolicyModel& policy,
                           const ParamVector& theta, double h = 1e-5,
                           double cap = kDefaultEnumerationCap);

/// One validated inequality: an empirical quantity against its theoretical
/// bound, with slack = bound - empirical (pass means slack >= 0).
struct CheckItem {
  std::string check;
  std::string params;
  double empirical = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool pass = false;
};

struct Report {
  std::string suite;
  std::vector<CheckItem> items;
  bool all_pass() const;
};

/// Serialized as a JSON array of line items, each
/// {check, params, empirical, bound, slack, pass}.
std::string report_to_json(const Report& report);

/// Trimmed-frequency concentration: over `trials` batches of M bits at true
/// preference sigma(r1 - r0), the frequency of |p_hat - p| exceeding
/// sqrt(log(1/delta) / M) must stay within delta plus sampling slack
/// (2 sqrt(delta / trials)). Also checks that trimming never increases the
/// deviation on any draw.
Report validate_concentration(const LinkFunction& sigma, double r1, double r0,
                              int m_bits, int trials, double delta,
                              std::uint64_t seed);

/// Reward-difference recovery bias: first and second moments of
/// sigma^{-1}(p_hat) - (r1 - r0) against L sqrt(2 log M / M) + 2 B / M^2 and
/// 2 L^2 log M / M + 4 B^2 / M^2.
Report validate_reward_bias(const LinkFunction& sigma, double r1, double r0,
                            int m_bits, int trials, std::uint64_t seed);

/// Smoothing properties at theta for radius mu and declared smoothness L:
/// |V_mu - V| <= L mu^2 / 2, ||grad V_mu - grad V|| <= mu L d / 2, and the
/// single-sample gradient second moment <= 2 d ||grad V||^2 + mu^2 L^2 d^2
/// / 2, each with 3-standard-error Monte Carlo slack.
Report validate_smoothing(const EnvModel& env, const PolicyModel& policy,
                          const ParamVector& theta, double mu, double L,
                          int n_samples, std::uint64_t seed);

/// Direction-sampler moments: sphere and block second moments against I / d
/// in Frobenius norm, and the block identity E[<g, v> v] = g / d on a fixed
/// test vector.
Report validate_sampler_moments(int sphere_dim, int block_dim,
                                const std::vector<int>& block_sizes,
                                int n_samples, std::uint64_t seed);

/// Mean of the exact-readout gradient estimator over n_dirs fresh directions
/// against an independent smoothed-gradient estimate, within 3 combined
/// standard errors.
Report validate_grad_unbiasedness(const EnvModel& env,
                                  const PolicyModel& policy,
                                  const ParamVector& theta, double mu,
                                  int n_dirs, std::uint64_t seed);

}  // namespace prefgrad
