#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "callroute/domain.hpp"
#include "callroute/policy.hpp"
#include "callroute/random.hpp"

namespace callroute {

enum class OptimizerKind : std::uint8_t { Sgd, Adam };

struct PpoConfig {
  double gamma = 0.95;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  int epochs_per_update = 4;
  int minibatch_size = 128;
  int rollout_length = 2048;
  double learning_rate = 10.0;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double reward_scale = 0.01;
  std::int64_t total_steps = 4'000'000;
  int checkpoint_every = 0;  // updates between checkpoints; 0 disables
  OptimizerKind optimizer = OptimizerKind::Sgd;
  bool anneal_lr = true;  // linear decay to zero over total_steps
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

// Step-indexed rollout storage; episodes may span buffer boundaries.
struct RolloutBuffer {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> rewards;  // scaled
  std::vector<std::uint8_t> dones;
  std::vector<double> values;
  std::vector<double> log_probs;
  double bootstrap_value = 0.0;

  std::size_t size() const noexcept { return states.size(); }
  void clear();
  void push(int state, int action, double reward, bool done, double value, double log_prob);
  // Throws InvalidBuffer if the parallel arrays disagree in length.
  void validate() const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value,
                      double gamma, double lambda);

// In-place shift to mean 0 and scale to unit (population) std.
void normalize_advantages(std::span<double> advantages);

// d log softmax(logits)[action] / d logits.
ActionPair log_prob_gradient(const ActionPair& logits, int action);

// Per-minibatch clipped surrogate plus entropy bonus:
//   J = mean_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) + c_H mean_i H(s_i)
struct SurrogateTerms {
  double surrogate = 0.0;
  double entropy = 0.0;
  double objective = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

SurrogateTerms surrogate_objective(const SoftmaxPolicy& policy, const RolloutBuffer& buffer,
                                   std::span<const double> advantages,
                                   std::span<const std::size_t> batch, const PpoConfig& cfg);

// Gradient of surrogate_objective with respect to every logit (dense,
// one pair per decision state).
std::vector<ActionPair> surrogate_gradient(const SoftmaxPolicy& policy, const RolloutBuffer& buffer,
                                           std::span<const double> advantages,
                                           std::span<const std::size_t> batch, const PpoConfig& cfg);

// Applies one gradient step to the tabular parameters: ascent on the
// logits, descent on the values. Adam keeps per-parameter moments across
// calls; SGD is stateless.
class TabularOptimizer {
 public:
  TabularOptimizer(const PpoConfig& cfg, std::size_t states);
  void step(SoftmaxPolicy& policy, const std::vector<ActionPair>& logit_ascent,
            const std::vector<double>& value_descent);
  void set_learning_rate(double lr) noexcept { lr_ = lr; }
  double learning_rate() const noexcept { return lr_; }

 private:
  OptimizerKind kind_;
  double lr_, value_coef_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<ActionPair> m_logit_, v_logit_;
  std::vector<double> m_value_, v_value_;
};

struct UpdateStats {
  double surrogate = 0.0;
  double entropy = 0.0;
  double value_loss = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  int minibatches = 0;
};

// Epochs of shuffled minibatch fixed-step gradient updates: ascent on the
// surrogate for the logits, descent on squared error for the values.
// Throws TrainingDiverged on a non-finite gradient.
UpdateStats ppo_update(SoftmaxPolicy& policy, const RolloutBuffer& buffer,
                       std::span<const double> advantages, std::span<const double> returns,
                       const PpoConfig& cfg, RngStream& shuffle_rng, TabularOptimizer& optimizer);
UpdateStats ppo_update(SoftmaxPolicy& policy, const RolloutBuffer& buffer,
                       std::span<const double> advantages, std::span<const double> returns,
                       const PpoConfig& cfg, RngStream& shuffle_rng);

struct CurveRow {
  std::int64_t steps = 0;
  double episode_reward = 0.0;  // unscaled
};

struct TrainHooks {
  std::function<void(int update, std::int64_t steps, const UpdateStats&)> on_update;
  std::function<void(int update, const SoftmaxPolicy&)> on_checkpoint;
};

struct TrainResult {
  SoftmaxPolicy policy;
  std::vector<CurveRow> curve;
  int updates = 0;
};

// Trains on fresh environments built from `sim`; episodes use streams
// 0, 1, 2, ... of master_seed.
TrainResult train(const SimConfig& sim, const PpoConfig& cfg, std::uint64_t master_seed,
                  const TrainHooks& hooks = {});

}  // namespace callroute
