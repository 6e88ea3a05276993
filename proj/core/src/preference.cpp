#include "prefgrad/preference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "prefgrad/errors.hpp"

namespace prefgrad {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// Numerically stable logistic, exact at 0.
double logistic_eval(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double interp(const std::vector<double>& xs, const std::vector<double>& ps,
              double x) {
  // xs is strictly increasing and brackets x; linear between knots.
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  if (hi == 0) return ps.front();
  if (hi == xs.size()) return ps.back();
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ps[lo] + t * (ps[hi] - ps[lo]);
}

}  // namespace

LinkFunction LinkFunction::logistic(double horizon_bound,
                                    std::optional<double> lipschitz_inv) {
  require(std::isfinite(horizon_bound) && horizon_bound > 0.0,
          "link: horizon bound must be positive");
  LinkFunction f;
  f.logistic_ = true;
  f.horizon_bound_ = horizon_bound;
  if (lipschitz_inv) {
    require(std::isfinite(*lipschitz_inv) && *lipschitz_inv > 0.0,
            "link: lipschitz_inv must be positive");
    f.lipschitz_user_set_ = true;
    f.lipschitz_cached_ = *lipschitz_inv;
  }
  return f;
}

LinkFunction LinkFunction::monotone_table(
    std::vector<double> xs, std::vector<double> ps, double horizon_bound,
    std::optional<double> lipschitz_inv) {
  require(std::isfinite(horizon_bound) && horizon_bound > 0.0,
          "link: horizon bound must be positive");
  require(xs.size() == ps.size() && xs.size() >= 2,
          "link table: xs and ps must have equal length >= 2");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(std::isfinite(xs[i]), "link table: xs must be finite");
    require(std::isfinite(ps[i]) && ps[i] >= 0.0 && ps[i] <= 1.0,
            "link table: ps must lie in [0, 1]");
    if (i > 0) {
      require(xs[i] > xs[i - 1], "link table: xs must be strictly increasing");
      require(ps[i] > ps[i - 1], "link table: ps must be strictly increasing");
    }
  }
  require(xs.front() <= -horizon_bound && xs.back() >= horizon_bound,
          "link table: xs must cover [-B, B]");
  require(std::abs(interp(xs, ps, 0.0) - 0.5) <= 1e-9,
          "link table: sigma(0) must equal 1/2 within 1e-9");

  LinkFunction f;
  f.logistic_ = false;
  f.horizon_bound_ = horizon_bound;
  f.xs_ = std::move(xs);
  f.ps_ = std::move(ps);
  if (lipschitz_inv) {
    require(std::isfinite(*lipschitz_inv) && *lipschitz_inv > 0.0,
            "link: lipschitz_inv must be positive");
    f.lipschitz_user_set_ = true;
    f.lipschitz_cached_ = *lipschitz_inv;
  }
  return f;
}

double LinkFunction::eval(double x) const {
  if (!(x >= -horizon_bound_ && x <= horizon_bound_)) {
    throw std::domain_error("link: argument " + std::to_string(x) +
                            " outside [-B, B] with B = " +
                            std::to_string(horizon_bound_));
  }
  return logistic_ ? logistic_eval(x) : interp(xs_, ps_, x);
}

double LinkFunction::default_trim_level() const {
  const double lo = eval(-horizon_bound_);
  const double hi = 1.0 - eval(horizon_bound_);
  const double delta = std::min(lo, hi);
  if (!(delta > 0.0)) {
    throw ConfigError(
        "link: degenerate link (sigma saturates at 0 or 1 on [-B, B]); no "
        "positive trim level exists");
  }
  return delta;
}

double LinkFunction::inverse(double p) const {
  const double delta = default_trim_level();
  if (!(p >= delta - 1e-12 && p <= 1.0 - delta + 1e-12)) {
    throw std::domain_error(
        "link inverse: p = " + std::to_string(p) +
        " outside the trimmed interval [" + std::to_string(delta) + ", " +
        std::to_string(1.0 - delta) + "]; trim the estimate first");
  }
  if (logistic_) return std::log(p / (1.0 - p));

  // Monotone table: bisect on [-B, B]. p outside the attainable range maps
  // to the matching endpoint.
  if (p <= eval(-horizon_bound_)) return -horizon_bound_;
  if (p >= eval(horizon_bound_)) return horizon_bound_;
  double lo = -horizon_bound_;
  double hi = horizon_bound_;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double val = eval(mid);
    if (std::abs(val - p) <= 1e-10 && hi - lo <= 1e-12) return mid;
    if (val < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double LinkFunction::lipschitz_inv() const {
  if (lipschitz_user_set_) return lipschitz_cached_;
  const double delta = default_trim_level();
  if (logistic_) return 1.0 / (delta * (1.0 - delta));

  // Steepest slope of the inverse interpolant across segments overlapping
  // [delta, 1 - delta].
  double steepest = 0.0;
  for (std::size_t i = 1; i < xs_.size(); ++i) {
    if (ps_[i] < delta || ps_[i - 1] > 1.0 - delta) continue;
    steepest = std::max(steepest,
                        (xs_[i] - xs_[i - 1]) / (ps_[i] - ps_[i - 1]));
  }
  require(steepest > 0.0,
          "link table: no segment overlaps the trimmed interval");
  return steepest;
}

int sample_feedback(const LinkFunction& sigma, double r1, double r0,
                    RngStream& rng) {
  const double bound = sigma.horizon_bound();
  if (!(r1 >= 0.0 && r1 <= bound && r0 >= 0.0 && r0 <= bound)) {
    throw std::domain_error("sample_feedback: rewards must lie in [0, B]");
  }
  return rng.uniform01() < sigma.eval(r1 - r0) ? 1 : 0;
}

double trim(double a, double delta) {
  require(delta > 0.0 && delta < 0.5,
          "trim: delta must lie strictly between 0 and 1/2");
  return std::clamp(a, delta, 1.0 - delta);
}

PreferenceEstimate estimate_preference(std::span<const int> bits,
                                       double delta) {
  if (bits.empty()) {
    throw ConfigError("estimate_preference: at least one feedback bit required");
  }
  long long ones = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) {
      throw ConfigError("estimate_preference: bits must be 0 or 1");
    }
    ones += b;
  }
  PreferenceEstimate est;
  est.num_bits = static_cast<int>(bits.size());
  est.delta = delta;
  est.p_hat = trim(static_cast<double>(ones) / static_cast<double>(bits.size()),
                   delta);
  return est;
}

}  // namespace prefgrad
