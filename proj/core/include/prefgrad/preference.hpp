#pragma once

#include <optional>
#include <span>
#include <vector>

#include "prefgrad/rng.hpp"

namespace prefgrad {

/// Preference link sigma: maps a trajectory reward difference in [-B, B]
/// (B = horizon bound, the largest possible trajectory reward) to the
/// probability that the second trajectory is preferred. Strictly increasing
/// with sigma(0) = 1/2. Logistic or a user-supplied strictly increasing
/// table interpolated piecewise-linearly.
class LinkFunction {
 public:
  static LinkFunction logistic(double horizon_bound,
                               std::optional<double> lipschitz_inv = {});

  /// xs strictly increasing and covering [-B, B]; ps strictly increasing
  /// within [0, 1]; the interpolant must pass through (0, 1/2) within 1e-9.
  static LinkFunction monotone_table(std::vector<double> xs,
                                     std::vector<double> ps,
                                     double horizon_bound,
                                     std::optional<double> lipschitz_inv = {});

  /// sigma(x) for x in [-B, B]; outside is a domain error.
  double eval(double x) const;

  /// sigma^{-1}(p) for p in [default_trim_level(), 1 - default_trim_level()];
  /// outside that interval is a domain error (trim first). Closed form for
  /// the logistic, bisection on [-B, B] to |sigma(x) - p| <= 1e-10 otherwise.
  double inverse(double p) const;

  double horizon_bound() const { return horizon_bound_; }

  /// min{sigma(-B), 1 - sigma(B)}: the widest trim level that keeps every
  /// achievable preference probability inside the trimmed interval. Zero
  /// (a degenerate link) is a configuration error.
  double default_trim_level() const;

  /// Lipschitz constant of sigma^{-1} on the trimmed interval. When not
  /// supplied by the caller it is derived: 1 / (delta * (1 - delta)) for the
  /// logistic, the steepest inverse interpolation slope for tables.
  double lipschitz_inv() const;

  bool lipschitz_user_set() const { return lipschitz_user_set_; }
  bool is_logistic() const { return logistic_; }

 private:
  LinkFunction() = default;

  bool logistic_ = true;
  double horizon_bound_ = 0.0;
  std::vector<double> xs_, ps_;  // table kind only
  bool lipschitz_user_set_ = false;
  double lipschitz_cached_ = 0.0;
};

/// One Bernoulli feedback bit: 1 with probability sigma(r1 - r0). Rewards
/// must lie in [0, horizon bound].
int sample_feedback(const LinkFunction& sigma, double r1, double r0,
                    RngStream& rng);

/// Clamp a to [delta, 1 - delta]. delta outside (0, 1/2) is a configuration
/// error.
double trim(double a, double delta);

struct PreferenceEstimate {
  double p_hat = 0.0;  // trimmed empirical preference frequency
  int num_bits = 0;
  double delta = 0.0;
};

/// Trimmed mean of feedback bits. Empty input is invalid; the output always
/// lies in [delta, 1 - delta].
PreferenceEstimate estimate_preference(std::span<const int> bits,
                                       double delta);

}  // namespace prefgrad
