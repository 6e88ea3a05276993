// Microbenchmarks for the hot paths: direction sampling, rollouts, the exact
// value oracle, and one full optimizer iteration.

#include <benchmark/benchmark.h>

#include "prefgrad/env.hpp"
#include "prefgrad/optimizer.hpp"
#include "prefgrad/perturb.hpp"
#include "prefgrad/policy.hpp"
#include "prefgrad/rng.hpp"

namespace {

using namespace prefgrad;

void BM_SphereDirection(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  RngStream rng(StreamFamily(1).stream(100));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_sphere_direction(d, rng));
  }
}
BENCHMARK(BM_SphereDirection)->Arg(8)->Arg(64)->Arg(512);

void BM_BlockDirection(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  RngStream rng(StreamFamily(1).stream(101));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_block_direction(d, k, rng));
  }
}
BENCHMARK(BM_BlockDirection)->Args({64, 4})->Args({512, 16});

void BM_Rollout(benchmark::State& state) {
  EnvModel env = make_chain(6, 8, 0.1);
  PolicyModel policy =
      PolicyModel::tabular(env.num_states(), env.num_actions(), env.horizon());
  ParamVector theta(static_cast<std::size_t>(policy.dim()), 0.1);
  RngStream rng(StreamFamily(2).stream(7));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_trajectory(env, policy, theta, rng));
  }
}
BENCHMARK(BM_Rollout);

void BM_ExactValue(benchmark::State& state) {
  EnvModel env = make_chain(3, 6, 0.1);  // (S A)^H = 6^6 ~ 4.7e4 paths
  PolicyModel policy =
      PolicyModel::tabular(env.num_states(), env.num_actions(), env.horizon());
  ParamVector theta(static_cast<std::size_t>(policy.dim()), 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_value(env, policy, theta));
  }
}
BENCHMARK(BM_ExactValue);

void BM_DpValue(benchmark::State& state) {
  EnvModel env = make_chain(3, 6, 0.1);
  PolicyModel policy =
      PolicyModel::tabular(env.num_states(), env.num_actions(), env.horizon());
  ParamVector theta(static_cast<std::size_t>(policy.dim()), 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dp_value(env, policy, theta));
  }
}
BENCHMARK(BM_DpValue);

void BM_OptimizerIteration(benchmark::State& state) {
  EnvModel env = make_bandit({0.0, 1.0});
  PolicyModel policy =
      PolicyModel::tabular(env.num_states(), env.num_actions(), env.horizon());
  LinkFunction link = LinkFunction::logistic(1.0);
  HyperParams hp;
  hp.T = 1;
  hp.N = 20;
  hp.M = 200;
  hp.mu = 1.0;
  hp.alpha = 0.1;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    hp.seed = seed++;
    benchmark::DoNotOptimize(zpg_run(env, policy, link, hp));
  }
}
BENCHMARK(BM_OptimizerIteration);

}  // namespace

BENCHMARK_MAIN();
