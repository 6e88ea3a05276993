#pragma once

#include <vector>

#include "prefgrad/env.hpp"
#include "prefgrad/policy.hpp"
#include "prefgrad/rng.hpp"

namespace prefgrad {

enum class PerturbScheme { kSphere, kBlock };

/// A sampled perturbation direction. Always unit Euclidean norm (within
/// 1e-12). Block directions additionally record which coordinates were
/// drawn and with which signs.
struct DirectionSample {
  std::vector<double> v;
  PerturbScheme scheme = PerturbScheme::kSphere;
  std::vector<int> coords;  // block: the K distinct coordinates, ascending
  std::vector<int> signs;   // block: +1 or -1 per coordinate
};

/// Uniform direction on the unit sphere in R^d: d standard normals,
/// normalized. E[v v^T] = I / d.
DirectionSample sample_sphere_direction(int d, RngStream& rng);

/// Block direction: a uniform K-subset of coordinates drawn without
/// replacement (every coordinate is included with probability exactly K / d)
/// with independent +-1 signs, scaled by 1 / sqrt(K). Satisfies
/// E[<g, v> v] = g / d for any fixed g.
DirectionSample sample_block_direction(int d, int k, RngStream& rng);

/// (d / mu) * value_diff * v. d must match the direction's dimension and mu
/// must be positive.
std::vector<double> gradient_estimate(int d, double mu, double value_diff,
                                      const DirectionSample& v);

/// Monte Carlo average of exact_value(theta + mu * u) over u uniform in the
/// unit ball (sphere sample scaled by U^(1/d)). mu = 0 returns
/// exact_value(theta) exactly, bypassing the sampling loop.
double smoothed_value(const EnvModel& env, const PolicyModel& policy,
                      const ParamVector& theta, double mu, int n_samples,
                      RngStream& rng, double cap = kDefaultEnumerationCap);

/// Monte Carlo average of (d / mu) * (V(theta + mu v) - V(theta)) * v over
/// sphere directions v: an unbiased estimate of the smoothed-value gradient.
std::vector<double> smoothed_gradient(const EnvModel& env,
                                      const PolicyModel& policy,
                                      const ParamVector& theta, double mu,
                                      int n_samples, RngStream& rng,
                                      double cap = kDefaultEnumerationCap);

}  // namespace prefgrad
