#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "prefgrad/errors.hpp"
#include "prefgrad/preference.hpp"
#include "prefgrad/rng.hpp"

using namespace prefgrad;

TEST_CASE("logistic link: midpoint, symmetry, monotonicity") {
  const LinkFunction sigma = LinkFunction::logistic(2.0);
  CHECK(sigma.eval(0.0) == 0.5);
  CHECK(sigma.eval(1.0) + sigma.eval(-1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sigma.eval(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-14));
  double prev = 0.0;
  for (double x = -2.0; x <= 2.0; x += 0.125) {
    const double p = sigma.eval(x);
    CHECK(p > prev);
    prev = p;
  }
  CHECK(sigma.is_logistic());
  CHECK_FALSE(sigma.lipschitz_user_set());
}

TEST_CASE("link evaluation is a domain error outside [-B, B]") {
  const LinkFunction sigma = LinkFunction::logistic(1.5);
  CHECK_THROWS_AS((void)sigma.eval(1.5001), std::domain_error);
  CHECK_THROWS_AS((void)sigma.eval(-2.0), std::domain_error);
  CHECK(std::isfinite(sigma.eval(1.5)));
  CHECK(std::isfinite(sigma.eval(-1.5)));
}

TEST_CASE("default trim levels: hand values at B = 1 and B = 4") {
  // min{sigma(-B), 1 - sigma(B)} = 1 / (1 + e^B) for the logistic.
  CHECK(LinkFunction::logistic(1.0).default_trim_level() ==
        doctest::Approx(0.2689414213699951).epsilon(1e-15));
  CHECK(LinkFunction::logistic(4.0).default_trim_level() ==
        doctest::Approx(0.017986209962091559).epsilon(1e-15));
}

TEST_CASE("logistic inverse: closed form round trip and domain errors") {
  const LinkFunction sigma = LinkFunction::logistic(3.0);
  for (double x = -3.0; x <= 3.0; x += 0.25) {
    CHECK(sigma.inverse(sigma.eval(x)) == doctest::Approx(x).epsilon(1e-12));
  }
  const double delta = sigma.default_trim_level();
  CHECK_THROWS_AS((void)sigma.inverse(delta / 2.0), std::domain_error);
  CHECK_THROWS_AS((void)sigma.inverse(1.0 - delta / 2.0), std::domain_error);
}

TEST_CASE("auto inverse-link Lipschitz constant: 1 / (delta (1 - delta))") {
  const LinkFunction sigma = LinkFunction::logistic(1.0);
  const double delta = 0.2689414213699951;
  CHECK(sigma.lipschitz_inv() ==
        doctest::Approx(1.0 / (delta * (1.0 - delta))).epsilon(1e-12));
  const LinkFunction pinned = LinkFunction::logistic(1.0, 7.5);
  CHECK(pinned.lipschitz_user_set());
  CHECK(pinned.lipschitz_inv() == 7.5);
}

TEST_CASE("monotone table link: interpolation, inverse by bisection") {
  // Samples of a genuinely non-logistic strictly increasing link.
  std::vector<double> xs, ps;
  for (int i = 0; i <= 16; ++i) {
    const double x = -2.0 + 4.0 * i / 16.0;
    xs.push_back(x);
    ps.push_back(0.5 + 0.45 * std::tanh(0.8 * x));  // sigma(0) = 1/2
  }
  const LinkFunction sigma = LinkFunction::monotone_table(xs, ps, 2.0);
  CHECK_FALSE(sigma.is_logistic());
  CHECK(sigma.eval(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  // Interpolation hits the knots exactly.
  CHECK(sigma.eval(xs[3]) == doctest::Approx(ps[3]).epsilon(1e-14));
  // Between knots: linear.
  const double mid = 0.5 * (xs[3] + xs[4]);
  CHECK(sigma.eval(mid) ==
        doctest::Approx(0.5 * (ps[3] + ps[4])).epsilon(1e-14));
  // Inverse round trip within the trimmed interval.
  const double delta = sigma.default_trim_level();
  for (double p = delta; p <= 1.0 - delta + 1e-12; p += 0.05) {
    const double x = sigma.inverse(std::min(p, 1.0 - delta));
    CHECK(sigma.eval(x) == doctest::Approx(std::min(p, 1.0 - delta)).epsilon(1e-8));
  }
  // The auto Lipschitz constant bounds the steepest inverse slope seen on a
  // fine grid.
  const double L = sigma.lipschitz_inv();
  double steepest = 0.0;
  for (double p = delta; p + 1e-3 <= 1.0 - delta; p += 1e-3) {
    steepest = std::max(
        steepest, (sigma.inverse(p + 1e-3) - sigma.inverse(p)) / 1e-3);
  }
  CHECK(steepest <= L * (1.0 + 1e-6));
}

TEST_CASE("monotone table validation") {
  // ps not strictly increasing.
  CHECK_THROWS_AS(LinkFunction::monotone_table({-1.0, 0.0, 1.0},
                                               {0.3, 0.5, 0.5}, 1.0),
                  ConfigError);
  // xs not covering [-B, B].
  CHECK_THROWS_AS(LinkFunction::monotone_table({-0.5, 0.0, 0.5},
                                               {0.3, 0.5, 0.7}, 1.0),
                  ConfigError);
  // sigma(0) far from 1/2.
  CHECK_THROWS_AS(LinkFunction::monotone_table({-1.0, 0.0, 1.0},
                                               {0.3, 0.6, 0.7}, 1.0),
                  ConfigError);
  // Probabilities outside [0, 1].
  CHECK_THROWS_AS(LinkFunction::monotone_table({-1.0, 0.0, 1.0},
                                               {-0.1, 0.5, 0.9}, 1.0),
                  ConfigError);
}

TEST_CASE("feedback sampling matches the link probability") {
  const LinkFunction sigma = LinkFunction::logistic(4.0);
  const StreamFamily family(2718);
  RngStream rng = family.stream(streams::kFeedback, 0, 0);
  const double r1 = 1.5, r0 = 0.5;
  const double p = sigma.eval(r1 - r0);
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += sample_feedback(sigma, r1, r0, rng);
  const double freq = static_cast<double>(ones) / n;
  CHECK(std::abs(freq - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n));
  // Rewards outside [0, B] are refused.
  CHECK_THROWS_AS(sample_feedback(sigma, 4.5, 0.0, rng), std::domain_error);
  CHECK_THROWS_AS(sample_feedback(sigma, 1.0, -0.25, rng), std::domain_error);
}

TEST_CASE("golden feedback bits are pinned") {
  const LinkFunction sigma = LinkFunction::logistic(4.0);
  const StreamFamily family(99);
  RngStream rng = family.stream(streams::kFeedback, 3, 1);
  const std::string expected = "111001111110";
  std::string got;
  for (int m = 0; m < 12; ++m) {
    got += sample_feedback(sigma, 1.5, 0.5, rng) ? '1' : '0';
  }
  CHECK(got == expected);
}

TEST_CASE("trim clamps into [delta, 1 - delta] and validates delta") {
  CHECK(trim(0.03, 0.1) == 0.1);
  CHECK(trim(0.5, 0.1) == 0.5);
  CHECK(trim(0.99, 0.1) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK_THROWS_AS((void)trim(0.5, 0.0), ConfigError);
  CHECK_THROWS_AS((void)trim(0.5, 0.5), ConfigError);
  CHECK_THROWS_AS((void)trim(0.5, -0.1), ConfigError);
}

TEST_CASE("trimming never increases the distance to an achievable p") {
  // For p in [delta, 1 - delta], |trim(x) - p| <= |x - p| for every x:
  // clamping toward the interval cannot move away from points inside it.
  const double delta = 0.12;
  for (double p = delta; p <= 1.0 - delta + 1e-12; p += 0.02) {
    for (double x = 0.0; x <= 1.0 + 1e-12; x += 0.01) {
      CHECK(std::abs(trim(x, delta) - p) <= std::abs(x - p) + 1e-15);
    }
  }
}

TEST_CASE("estimate_preference: trimmed mean of bits") {
  std::vector<int> bits = {1, 1, 1, 0};
  const PreferenceEstimate est = estimate_preference(bits, 0.1);
  CHECK(est.p_hat == 0.75);
  CHECK(est.num_bits == 4);
  CHECK(est.delta == 0.1);

  std::vector<int> all_ones(10, 1);
  CHECK(estimate_preference(all_ones, 0.2).p_hat == doctest::Approx(0.8));
  std::vector<int> all_zeros(10, 0);
  CHECK(estimate_preference(all_zeros, 0.2).p_hat == doctest::Approx(0.2));

  std::vector<int> empty;
  CHECK_THROWS_AS((void)estimate_preference(empty, 0.1), ConfigError);
  std::vector<int> junk = {0, 2, 1};
  CHECK_THROWS_AS((void)estimate_preference(junk, 0.1), ConfigError);
}
