#include "prefgrad/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "prefgrad/errors.hpp"
#include "prefgrad/perturb.hpp"

namespace prefgrad {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

CheckItem make_item(std::string check, std::string params, double empirical,
                    double bound) {
  CheckItem item;
  item.check = std::move(check);
  item.params = std::move(params);
  item.empirical = empirical;
  item.bound = bound;
  item.slack = bound - empirical;
  item.pass = empirical <= bound;
  return item;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

}  // namespace

std::vector<double> finite_diff_gradient(
    const std::function<double(const ParamVector&)>& f,
    const ParamVector& theta, double h) {
  require(h > 0.0, "finite_diff_gradient: h must be positive");
  std::vector<double> grad(theta.size());
  ParamVector probe(theta);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double up = f(probe);
    probe[i] = theta[i] - h;
    const double down = f(probe);
    probe[i] = theta[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> finite_diff_gradient(const EnvModel& env,
                                         const PolicyModel& policy,
                                         const ParamVector& theta, double h,
                                         double cap) {
  return finite_diff_gradient(
      [&](const ParamVector& p) { return exact_value(env, policy, p, cap); },
      theta, h);
}

double stationarity_metric(const EnvModel& env, const PolicyModel& policy,
                           const ParamVector& theta, double h, double cap) {
  const std::vector<double> g = finite_diff_gradient(env, policy, theta, h, cap);
  double s = 0.0;
  for (double x : g) s += x * x;
  return s;
}

bool Report::all_pass() const {
  for (const CheckItem& item : items) {
    if (!item.pass) return false;
  }
  return true;
}

std::string report_to_json(const Report& report) {
  nlohmann::json items = nlohmann::json::array();
  for (const CheckItem& item : report.items) {
    items.push_back({{"check", item.check},
                     {"params", item.params},
                     {"empirical", item.empirical},
                     {"bound", item.bound},
                     {"slack", item.slack},
                     {"pass", item.pass}});
  }
  return items.dump(2);
}

Report validate_concentration(const LinkFunction& sigma, double r1, double r0,
                              int m_bits, int trials, double delta,
                              std::uint64_t seed) {
  require(m_bits >= 1, "validate_concentration: M must be >= 1");
  require(trials >= 1, "validate_concentration: trials must be >= 1");
  require(delta > 0.0 && delta < 0.25,
          "validate_concentration: delta must lie in (0, 1/4)");

  const double p_true = sigma.eval(r1 - r0);
  const double trim_level = sigma.default_trim_level();
  const double radius =
      std::sqrt(std::log(1.0 / delta) / static_cast<double>(m_bits));

  RngStream rng = StreamFamily(seed).stream(streams::kDiagnostics);
  std::vector<int> bits(static_cast<std::size_t>(m_bits));
  long long violations = 0;
  long long clamp_dominated = 0;
  for (int trial = 0; trial < trials; ++trial) {
    for (int m = 0; m < m_bits; ++m) {
      bits[static_cast<std::size_t>(m)] = sample_feedback(sigma, r1, r0, rng);
    }
    const PreferenceEstimate est = estimate_preference(bits, trim_level);
    double ones = 0.0;
    for (int b : bits) ones += b;
    const double untrimmed = ones / static_cast<double>(m_bits);
    if (std::abs(est.p_hat - p_true) > radius) ++violations;
    if (std::abs(est.p_hat - p_true) <= std::abs(untrimmed - p_true) + 1e-15) {
      ++clamp_dominated;
    }
  }

  Report report;
  report.suite = "concentration";
  const std::string params = "p=" + fmt(p_true) + " M=" +
                             std::to_string(m_bits) + " trials=" +
                             std::to_string(trials) + " delta=" + fmt(delta);
  const double freq =
      static_cast<double>(violations) / static_cast<double>(trials);
  const double freq_bound =
      delta + 2.0 * std::sqrt(delta / static_cast<double>(trials));
  report.items.push_back(
      make_item("trimmed-frequency-deviation", params, freq, freq_bound));

  // Clamping toward the trimmed interval can only reduce the deviation from
  // a preference that lies inside it; every draw must satisfy that.
  const double fraction_dominated =
      static_cast<double>(clamp_dominated) / static_cast<double>(trials);
  CheckItem dominated;
  dominated.check = "clamp-domination";
  dominated.params = params;
  dominated.empirical = fraction_dominated;
  dominated.bound = 1.0;
  dominated.slack = fraction_dominated - 1.0;
  dominated.pass = fraction_dominated >= 1.0;
  report.items.push_back(dominated);
  return report;
}

Report validate_reward_bias(const LinkFunction& sigma, double r1, double r0,
                            int m_bits, int trials, std::uint64_t seed) {
  require(m_bits >= 2, "validate_reward_bias: M must be >= 2");
  require(trials >= 1, "validate_reward_bias: trials must be >= 1");

  const double gap = r1 - r0;
  const double trim_level = sigma.default_trim_level();
  const double lipschitz = sigma.lipschitz_inv();
  const double bound_b = sigma.horizon_bound();
  const double log_m = std::log(static_cast<double>(m_bits));

  RngStream rng = StreamFamily(seed).stream(streams::kDiagnostics, 1);
  std::vector<int> bits(static_cast<std::size_t>(m_bits));
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    for (int m = 0; m < m_bits; ++m) {
      bits[static_cast<std::size_t>(m)] = sample_feedback(sigma, r1, r0, rng);
    }
    const PreferenceEstimate est = estimate_preference(bits, trim_level);
    const double err = sigma.inverse(est.p_hat) - gap;
    abs_sum += std::abs(err);
    sq_sum += err * err;
  }

  const double m = static_cast<double>(m_bits);
  const double first_bound =
      lipschitz * std::sqrt(2.0 * log_m / m) + 2.0 * bound_b / (m * m);
  const double second_bound =
      2.0 * lipschitz * lipschitz * log_m / m +
      4.0 * bound_b * bound_b / (m * m);

  Report report;
  report.suite = "reward-bias";
  const std::string params = "gap=" + fmt(gap) + " M=" +
                             std::to_string(m_bits) + " trials=" +
                             std::to_string(trials) + " L=" + fmt(lipschitz);
  report.items.push_back(
      make_item("first-moment", params,
                abs_sum / static_cast<double>(trials), first_bound));
  report.items.push_back(
      make_item("second-moment", params,
                sq_sum / static_cast<double>(trials), second_bound));
  return report;
}

Report validate_smoothing(const EnvModel& env, const PolicyModel& policy,
                          const ParamVector& theta, double mu, double L,
                          int n_samples, std::uint64_t seed) {
  require(mu > 0.0, "validate_smoothing: mu must be positive");
  require(L > 0.0, "validate_smoothing: L must be positive");
  require(n_samples >= 2, "validate_smoothing: n_samples must be >= 2");

  const int d = policy.dim();
  const double n = static_cast<double>(n_samples);
  const double value = exact_value(env, policy, theta);
  const std::vector<double> grad = finite_diff_gradient(env, policy, theta);
  const double grad_norm = norm2(grad);
  const StreamFamily family(seed);

  Report report;
  report.suite = "smoothing";
  const std::string params =
      "d=" + std::to_string(d) + " mu=" + fmt(mu) + " L=" + fmt(L) +
      " samples=" + std::to_string(n_samples);

  // Value gap |V_mu - V| <= L mu^2 / 2, with Monte Carlo standard error.
  {
    RngStream rng = family.stream(streams::kDiagnostics, 2);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n_samples; ++i) {
      DirectionSample dir = sample_sphere_direction(d, rng);
      const double radius =
          std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
      for (double& x : dir.v) x *= radius;
      const double v = exact_value(env, policy, perturbed(theta, mu, dir.v));
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    const double stderr3 = 3.0 * std::sqrt(var / n);
    report.items.push_back(make_item("value-gap", params,
                                     std::abs(mean - value),
                                     0.5 * L * mu * mu + stderr3));
  }

  // Gradient gap ||grad V_mu - grad V|| <= mu L d / 2. The smoothed gradient
  // is itself a Monte Carlo mean; its standard error enters the budget.
  {
    RngStream rng = family.stream(streams::kDiagnostics, 3);
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
    double sum_sq_norm = 0.0;
    for (int i = 0; i < n_samples; ++i) {
      const DirectionSample dir = sample_sphere_direction(d, rng);
      const double diff =
          exact_value(env, policy, perturbed(theta, mu, dir.v)) - value;
      const double scale = static_cast<double>(d) / mu * diff;
      double sample_norm_sq = 0.0;
      for (int j = 0; j < d; ++j) {
        const double g = scale * dir.v[static_cast<std::size_t>(j)];
        mean[static_cast<std::size_t>(j)] += g;
        sample_norm_sq += g * g;
      }
      sum_sq_norm += sample_norm_sq;
    }
    for (double& x : mean) x /= n;
    const double mean_norm_sq = norm2(mean) * norm2(mean);
    const double var = std::max(0.0, sum_sq_norm / n - mean_norm_sq);
    const double stderr3 = 3.0 * std::sqrt(var / n);

    std::vector<double> gap(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      gap[static_cast<std::size_t>(j)] =
          mean[static_cast<std::size_t>(j)] - grad[static_cast<std::size_t>(j)];
    }
    report.items.push_back(make_item("gradient-gap", params, norm2(gap),
                                     0.5 * mu * L * static_cast<double>(d) +
                                         stderr3));

    // Single-sample second moment E||(d/mu) (V(theta + mu v) - V) v||^2
    // <= 2 d ||grad V||^2 + mu^2 L^2 d^2 / 2.
    const double second_bound =
        2.0 * static_cast<double>(d) * grad_norm * grad_norm +
        0.5 * mu * mu * L * L * static_cast<double>(d) * static_cast<double>(d);
    {
      RngStream rng2 = family.stream(streams::kDiagnostics, 4);
      double s = 0.0;
      double s2 = 0.0;
      for (int i = 0; i < n_samples; ++i) {
        const DirectionSample dir = sample_sphere_direction(d, rng2);
        const double diff =
            exact_value(env, policy, perturbed(theta, mu, dir.v)) - value;
        const double scale = static_cast<double>(d) / mu * diff;
        const double norm_sq = scale * scale;  // ||v|| = 1
        s += norm_sq;
        s2 += norm_sq * norm_sq;
      }
      const double mean_sq = s / n;
      const double sq_var = std::max(0.0, s2 / n - mean_sq * mean_sq);
      report.items.push_back(make_item(
          "gradient-noise-second-moment", params, mean_sq,
          second_bound + 3.0 * std::sqrt(sq_var / n)));
    }
  }

  return report;
}

Report validate_sampler_moments(int sphere_dim, int block_dim,
                                const std::vector<int>& block_sizes,
                                int n_samples, std::uint64_t seed) {
  require(sphere_dim >= 1 && block_dim >= 1,
          "validate_sampler_moments: dimensions must be >= 1");
  require(n_samples >= 1, "validate_sampler_moments: n_samples must be >= 1");

  const StreamFamily family(seed);
  Report report;
  report.suite = "sampler-moments";
  const double n = static_cast<double>(n_samples);

  // Sphere second moment against I / d in Frobenius norm.
  {
    const int d = sphere_dim;
    RngStream rng = family.stream(streams::kDiagnostics, 10);
    std::vector<double> second(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < n_samples; ++i) {
      const DirectionSample dir = sample_sphere_direction(d, rng);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
          second[static_cast<std::size_t>(r) * d + c] +=
              dir.v[static_cast<std::size_t>(r)] *
              dir.v[static_cast<std::size_t>(c)];
        }
      }
    }
    double fro_sq = 0.0;
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        const double target = r == c ? 1.0 / static_cast<double>(d) : 0.0;
        const double diff = second[static_cast<std::size_t>(r) * d + c] / n -
                            target;
        fro_sq += diff * diff;
      }
    }
    report.items.push_back(make_item(
        "sphere-isotropy",
        "d=" + std::to_string(d) + " samples=" + std::to_string(n_samples),
        std::sqrt(fro_sq), 0.02));
  }

  for (int k : block_sizes) {
    const int d = block_dim;
    // Block second moment.
    {
      RngStream rng = family.stream(streams::kDiagnostics, 11,
                                    static_cast<std::uint64_t>(k));
      std::vector<double> second(static_cast<std::size_t>(d) * d, 0.0);
      for (int i = 0; i < n_samples; ++i) {
        const DirectionSample dir = sample_block_direction(d, k, rng);
        for (int r = 0; r < d; ++r) {
          if (dir.v[static_cast<std::size_t>(r)] == 0.0) continue;
          for (int c = 0; c < d; ++c) {
            second[static_cast<std::size_t>(r) * d + c] +=
                dir.v[static_cast<std::size_t>(r)] *
                dir.v[static_cast<std::size_t>(c)];
          }
        }
      }
      double fro_sq = 0.0;
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
          const double target = r == c ? 1.0 / static_cast<double>(d) : 0.0;
          const double diff =
              second[static_cast<std::size_t>(r) * d + c] / n - target;
          fro_sq += diff * diff;
        }
      }
      report.items.push_back(make_item(
          "block-isotropy",
          "d=" + std::to_string(d) + " K=" + std::to_string(k) +
              " samples=" + std::to_string(n_samples),
          std::sqrt(fro_sq), 0.02));
    }

    // Block identity E[<g, v> v] = g / d on a fixed deterministic g.
    {
      RngStream rng = family.stream(streams::kDiagnostics, 12,
                                    static_cast<std::uint64_t>(k));
      std::vector<double> g(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) {
        g[static_cast<std::size_t>(i)] =
            1.0 + static_cast<double>(i);  // no special structure
      }
      std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
      for (int i = 0; i < n_samples; ++i) {
        const DirectionSample dir = sample_block_direction(d, k, rng);
        double dot = 0.0;
        for (int j = 0; j < d; ++j) {
          dot += g[static_cast<std::size_t>(j)] *
                 dir.v[static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < d; ++j) {
          mean[static_cast<std::size_t>(j)] +=
              dot * dir.v[static_cast<std::size_t>(j)];
        }
      }
      double err_sq = 0.0;
      for (int j = 0; j < d; ++j) {
        const double diff = mean[static_cast<std::size_t>(j)] / n -
                            g[static_cast<std::size_t>(j)] /
                                static_cast<double>(d);
        err_sq += diff * diff;
      }
      report.items.push_back(make_item(
          "block-identity",
          "d=" + std::to_string(d) + " K=" + std::to_string(k) +
              " samples=" + std::to_string(n_samples),
          std::sqrt(err_sq), 0.02 * norm2(g)));
    }
  }

  return report;
}

Report validate_grad_unbiasedness(const EnvModel& env,
                                  const PolicyModel& policy,
                                  const ParamVector& theta, double mu,
                                  int n_dirs, std::uint64_t seed) {
  require(mu > 0.0, "validate_grad_unbiasedness: mu must be positive");
  require(n_dirs >= 2, "validate_grad_unbiasedness: n_dirs must be >= 2");

  const int d = policy.dim();
  const double n = static_cast<double>(n_dirs);
  const double base = exact_value(env, policy, theta);
  const StreamFamily family(seed);

  // Estimator mean with the exact value-difference readout over fresh
  // directions, tracking per-coordinate variance for the standard error.
  std::vector<double> mean_a(static_cast<std::size_t>(d), 0.0);
  double var_trace_a = 0.0;
  {
    RngStream rng = family.stream(streams::kDiagnostics, 20);
    std::vector<double> sum_sq(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n_dirs; ++i) {
      const DirectionSample dir = sample_sphere_direction(d, rng);
      const double diff =
          exact_value(env, policy, perturbed(theta, mu, dir.v)) - base;
      const double scale = static_cast<double>(d) / mu * diff;
      for (int j = 0; j < d; ++j) {
        const double g = scale * dir.v[static_cast<std::size_t>(j)];
        mean_a[static_cast<std::size_t>(j)] += g;
        sum_sq[static_cast<std::size_t>(j)] += g * g;
      }
    }
    for (int j = 0; j < d; ++j) {
      mean_a[static_cast<std::size_t>(j)] /= n;
      var_trace_a +=
          std::max(0.0, sum_sq[static_cast<std::size_t>(j)] / n -
                            mean_a[static_cast<std::size_t>(j)] *
                                mean_a[static_cast<std::size_t>(j)]);
    }
  }

  // Independent smoothed-gradient estimate with its own stream.
  std::vector<double> mean_b(static_cast<std::size_t>(d), 0.0);
  double var_trace_b = 0.0;
  {
    RngStream rng = family.stream(streams::kDiagnostics, 21);
    std::vector<double> sum_sq(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n_dirs; ++i) {
      const DirectionSample dir = sample_sphere_direction(d, rng);
      const double diff =
          exact_value(env, policy, perturbed(theta, mu, dir.v)) - base;
      const double scale = static_cast<double>(d) / mu * diff;
      for (int j = 0; j < d; ++j) {
        const double g = scale * dir.v[static_cast<std::size_t>(j)];
        mean_b[static_cast<std::size_t>(j)] += g;
        sum_sq[static_cast<std::size_t>(j)] += g * g;
      }
    }
    for (int j = 0; j < d; ++j) {
      mean_b[static_cast<std::size_t>(j)] /= n;
      var_trace_b +=
          std::max(0.0, sum_sq[static_cast<std::size_t>(j)] / n -
                            mean_b[static_cast<std::size_t>(j)] *
                                mean_b[static_cast<std::size_t>(j)]);
    }
  }

  std::vector<double> gap(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    gap[static_cast<std::size_t>(j)] = mean_a[static_cast<std::size_t>(j)] -
                                       mean_b[static_cast<std::size_t>(j)];
  }
  const double combined_se = std::sqrt(var_trace_a / n + var_trace_b / n);

  Report report;
  report.suite = "grad-unbiasedness";
  report.items.push_back(make_item(
      "estimator-mean-gap",
      "d=" + std::to_string(d) + " mu=" + fmt(mu) + " dirs=" +
          std::to_string(n_dirs),
      norm2(gap), 3.0 * combined_se));
  return report;
}

}  // namespace prefgrad
