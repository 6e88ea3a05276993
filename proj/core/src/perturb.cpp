#include "prefgrad/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "prefgrad/errors.hpp"

namespace prefgrad {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

DirectionSample sample_sphere_direction(int d, RngStream& rng) {
  require(d >= 1, "sample_sphere_direction: d must be >= 1");
  DirectionSample out;
  out.scheme = PerturbScheme::kSphere;
  out.v.resize(static_cast<std::size_t>(d));
  for (;;) {
    double norm_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      out.v[static_cast<std::size_t>(i)] = rng.normal();
      norm_sq += out.v[static_cast<std::size_t>(i)] *
                 out.v[static_cast<std::size_t>(i)];
    }
    if (norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (double& x : out.v) x *= inv;
      return out;
    }
    // All-zero draw has probability zero; resample defensively.
  }
}

DirectionSample sample_block_direction(int d, int k, RngStream& rng) {
  require(d >= 1, "sample_block_direction: d must be >= 1");
  require(k >= 1 && k <= d,
          "sample_block_direction: k must lie in [1, d], got k = " +
              std::to_string(k));

  // Partial Fisher-Yates: the first k entries are a uniform k-subset.
  std::vector<int> pool(static_cast<std::size_t>(d));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const std::uint64_t j =
        rng.uniform_below(static_cast<std::uint64_t>(d - i));
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(i) + j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());

  DirectionSample out;
  out.scheme = PerturbScheme::kBlock;
  out.v.assign(static_cast<std::size_t>(d), 0.0);
  out.coords = std::move(pool);
  out.signs.resize(static_cast<std::size_t>(k));
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  for (int i = 0; i < k; ++i) {
    const int sign = rng.uniform01() < 0.5 ? -1 : 1;
    out.signs[static_cast<std::size_t>(i)] = sign;
    out.v[static_cast<std::size_t>(out.coords[static_cast<std::size_t>(i)])] =
        sign * scale;
  }
  return out;
}

std::vector<double> gradient_estimate(int d, double mu, double value_diff,
                                      const DirectionSample& v) {
  require(d >= 1 && v.v.size() == static_cast<std::size_t>(d),
          "gradient_estimate: d must match the direction dimension");
  require(mu > 0.0, "gradient_estimate: mu must be positive");
  const double scale = static_cast<double>(d) / mu * value_diff;
  std::vector<double> g(v.v);
  for (double& x : g) x *= scale;
  return g;
}

double smoothed_value(const EnvModel& env, const PolicyModel& policy,
                      const ParamVector& theta, double mu, int n_samples,
                      RngStream& rng, double cap) {
  require(n_samples >= 1, "smoothed_value: n_samples must be >= 1");
  if (mu == 0.0) return exact_value(env, policy, theta, cap);

  const int d = policy.dim();
  double sum = 0.0;
  for (int n = 0; n < n_samples; ++n) {
    DirectionSample dir = sample_sphere_direction(d, rng);
    const double radius =
        std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
    for (double& x : dir.v) x *= radius;
    sum += exact_value(env, policy, perturbed(theta, mu, dir.v), cap);
  }
  return sum / static_cast<double>(n_samples);
}

std::vector<double> smoothed_gradient(const EnvModel& env,
                                      const PolicyModel& policy,
                                      const ParamVector& theta, double mu,
                                      int n_samples, RngStream& rng,
                                      double cap) {
  require(n_samples >= 1, "smoothed_gradient: n_samples must be >= 1");
  require(mu > 0.0, "smoothed_gradient: mu must be positive");

  const int d = policy.dim();
  const double base = exact_value(env, policy, theta, cap);
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (int n = 0; n < n_samples; ++n) {
    const DirectionSample dir = sample_sphere_direction(d, rng);
    const double diff =
        exact_value(env, policy, perturbed(theta, mu, dir.v), cap) - base;
    const double scale = static_cast<double>(d) / mu * diff;
    for (int i = 0; i < d; ++i) {
      mean[static_cast<std::size_t>(i)] +=
          scale * dir.v[static_cast<std::size_t>(i)];
    }
  }
  for (double& x : mean) x /= static_cast<double>(n_samples);
  return mean;
}

}  // namespace prefgrad
