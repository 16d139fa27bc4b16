#include <benchmark/benchmark.h>

#include "callroute/env.hpp"
#include "callroute/eval.hpp"
#include "callroute/mdp.hpp"
#include "callroute/policy.hpp"
#include "callroute/ppo.hpp"
#include "callroute/value_iteration.hpp"

namespace callroute {
namespace {

void BM_SimulateEpisode(benchmark::State& state) {
  SimConfig cfg;
  cfg.master_seed = 1;
  CallCentreEnv env(cfg);
  RngStream rng(2);
  std::uint64_t episode = 0;
  std::int64_t steps = 0;
  for (auto _ : state) {
    env.reset(episode++);
    while (!env.done()) {
      env.step(random_act(rng));
      ++steps;
    }
    benchmark::DoNotOptimize(env.episode_reward());
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateEpisode);

void BM_BuildModel(benchmark::State& state) {
  const auto mode = state.range(0) == 0 ? TransitionModel::Embedded : TransitionModel::Literal;
  for (auto _ : state) benchmark::DoNotOptimize(build_model(SimConfig{}, mode));
}
BENCHMARK(BM_BuildModel)->Arg(0)->Arg(1);

void BM_ValueIteration(benchmark::State& state) {
  const MdpModel model = build_model(SimConfig{}, TransitionModel::Embedded);
  const double gamma = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(model, gamma, 1e-6, 100000));
}
BENCHMARK(BM_ValueIteration)->Arg(80)->Arg(99)->Unit(benchmark::kMillisecond);

void BM_PpoUpdate(benchmark::State& state) {
  SimConfig sim;
  sim.master_seed = 3;
  CallCentreEnv env(sim);
  PpoConfig cfg;
  SoftmaxPolicy policy(sim.max_queue_len);
  RngStream rng(4);
  RolloutBuffer buffer;
  ObsState obs = env.reset();
  for (int t = 0; t < cfg.rollout_length; ++t) {
    const int s = encode_state(obs, sim.max_queue_len);
    const Action a = policy.sample(s, rng);
    const auto r = env.step(a);
    buffer.push(s, a.staff.value, r.reward * cfg.reward_scale, r.done, 0.0, policy.log_prob(s, a.staff.value));
    obs = r.done ? env.reset() : r.obs;
  }
  GaeResult gae = compute_gae(buffer.rewards, buffer.values, buffer.dones, 0.0, cfg.gamma, cfg.gae_lambda);
  normalize_advantages(gae.advantages);
  for (auto _ : state) {
    SoftmaxPolicy p = policy;
    benchmark::DoNotOptimize(ppo_update(p, buffer, gae.advantages, gae.returns, cfg, rng));
  }
}
BENCHMARK(BM_PpoUpdate)->Unit(benchmark::kMillisecond);

void BM_EvaluateRandom(benchmark::State& state) {
  const RandomPolicy policy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(SimConfig{}, policy, 100, 5, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_EvaluateRandom)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace callroute

BENCHMARK_MAIN();
