#include <cmath>
#include <functional>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "prefgrad/diagnostics.hpp"
#include "prefgrad/env.hpp"
#include "prefgrad/errors.hpp"
#include "prefgrad/policy.hpp"
#include "prefgrad/preference.hpp"

using namespace prefgrad;

TEST_CASE("finite differences are exact on quadratics") {
  const auto f = [](const ParamVector& x) {
    return 2.0 * x[0] * x[0] - 1.5 * x[1] * x[1] + 0.25 * x[0] + 3.0 * x[1];
  };
  const ParamVector theta = {0.7, -1.2};
  const std::vector<double> g = finite_diff_gradient(f, theta);
  // Central differences have no truncation error on a quadratic; only
  // floating-point cancellation remains.
  CHECK(std::abs(g[0] - (2.0 * 2.0 * 0.7 + 0.25)) <= 1e-9);
  CHECK(std::abs(g[1] - (-2.0 * 1.5 * (-1.2) + 3.0)) <= 1e-9);
  CHECK_THROWS_AS((void)finite_diff_gradient(f, theta, 0.0), ConfigError);
}

TEST_CASE("finite-difference truncation error is h^2 for a cubic") {
  const auto f = [](const ParamVector& x) { return x[0] * x[0] * x[0]; };
  const ParamVector at_one = {1.0};
  // ((1+h)^3 - (1-h)^3) / 2h = 3 + h^2 exactly.
  const double coarse = finite_diff_gradient(f, at_one, 1e-2)[0];
  const double fine = finite_diff_gradient(f, at_one, 1e-3)[0];
  CHECK(coarse - 3.0 == doctest::Approx(1e-4).epsilon(1e-6));
  CHECK(fine - 3.0 == doctest::Approx(1e-6).epsilon(1e-4));
  // Richardson check: halving h by 10 divides the error by 100.
  CHECK((coarse - 3.0) / (fine - 3.0) == doctest::Approx(100.0).epsilon(1e-3));
}

TEST_CASE("stationarity metric is the squared finite-difference gradient") {
  const EnvModel env = make_chain(3, 4, 0.2);
  const PolicyModel policy = PolicyModel::tabular(3, 2, 4);
  ParamVector theta(policy.dim());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    theta[i] = 0.1 * static_cast<double>(i % 5) - 0.2;
  }
  const std::vector<double> g = finite_diff_gradient(env, policy, theta);
  double norm_sq = 0.0;
  for (double x : g) norm_sq += x * x;
  CHECK(stationarity_metric(env, policy, theta) ==
        doctest::Approx(norm_sq).epsilon(1e-14));
}

TEST_CASE("report JSON round trip") {
  Report report;
  report.suite = "demo";
  CheckItem a;
  a.check = "first-moment";
  a.params = "gap=0.8 M=64";
  a.empirical = 0.01;
  a.bound = 0.05;
  a.slack = 0.04;
  a.pass = true;
  CheckItem b;
  b.check = "second-moment";
  b.params = "gap=0 M=64";
  b.empirical = 0.9;
  b.bound = 0.5;
  b.slack = -0.4;
  b.pass = false;
  report.items = {a, b};
  CHECK_FALSE(report.all_pass());

  const nlohmann::json parsed = nlohmann::json::parse(report_to_json(report));
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].at("check").get<std::string>() == "first-moment");
  CHECK(parsed[0].at("params").get<std::string>() == "gap=0.8 M=64");
  CHECK(parsed[0].at("empirical").get<double>() == 0.01);
  CHECK(parsed[0].at("bound").get<double>() == 0.05);
  CHECK(parsed[0].at("slack").get<double>() == 0.04);
  CHECK(parsed[0].at("pass").get<bool>());
  CHECK_FALSE(parsed[1].at("pass").get<bool>());

  report.items = {a};
  CHECK(report.all_pass());
}

TEST_CASE("concentration validator passes at desk scale and checks inputs") {
  const LinkFunction sigma = LinkFunction::logistic(1.0);
  const Report report =
      validate_concentration(sigma, 0.0, 0.0, 64, 2000, 0.05, 71);
  CHECK(report.all_pass());
  REQUIRE(!report.items.empty());
  for (const auto& item : report.items) CHECK(item.slack >= 0.0);

  CHECK_THROWS_AS((void)validate_concentration(sigma, 0.0, 0.0, 64, 2000,
                                               0.25, 71),
                  ConfigError);
  CHECK_THROWS_AS((void)validate_concentration(sigma, 0.0, 0.0, 0, 2000,
                                               0.05, 71),
                  ConfigError);
}

TEST_CASE("reward-bias validator passes at desk scale") {
  const LinkFunction sigma = LinkFunction::logistic(1.0);
  const Report zero_gap = validate_reward_bias(sigma, 0.0, 0.0, 256, 2000, 3);
  CHECK(zero_gap.all_pass());
  const Report with_gap =
      validate_reward_bias(sigma, 0.8, 0.0, 256, 2000, 4);
  CHECK(with_gap.all_pass());
  CHECK_THROWS_AS((void)validate_reward_bias(sigma, 0.0, 0.0, 1, 2000, 3),
                  ConfigError);
}

TEST_CASE("sampler-moment validator passes and reports every block size") {
  const Report report = validate_sampler_moments(3, 4, {1, 2, 4}, 100000, 17);
  CHECK(report.all_pass());
  // One sphere item plus two per block size (moment matrix + identity).
  CHECK(report.items.size() >= 4);
  CHECK_THROWS_AS((void)validate_sampler_moments(0, 4, {1}, 100, 17),
                  ConfigError);
}

TEST_CASE("smoothing and gradient-unbiasedness validators at small scale") {
  const EnvModel env = make_chain(2, 2, 0.1);
  const PolicyModel policy = PolicyModel::tabular(2, 2, 2);
  const ParamVector theta = {0.4, -0.2, 0.1, 0.3, -0.4, 0.2, -0.1, -0.3};
  const Report smoothing =
      validate_smoothing(env, policy, theta, 0.1, 0.5, 20000, 23);
  CHECK(smoothing.all_pass());
  const Report unbiased =
      validate_grad_unbiasedness(env, policy, theta, 0.1, 20000, 29);
  CHECK(unbiased.all_pass());
  CHECK_THROWS_AS(
      (void)validate_smoothing(env, policy, theta, 0.0, 0.5, 100, 23),
      ConfigError);
  CHECK_THROWS_AS(
      (void)validate_grad_unbiasedness(env, policy, theta, 0.1, 1, 29),
      ConfigError);
}
