#include "callroute/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "callroute/env.hpp"
#include "callroute/errors.hpp"

namespace callroute {

void PpoConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidParameter("ppo gamma must lie in [0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw InvalidParameter("gae_lambda must lie in [0, 1]");
  if (!(clip_epsilon > 0.0)) throw InvalidParameter("clip_epsilon must be positive");
  if (epochs_per_update < 1) throw InvalidParameter("epochs_per_update must be at least 1");
  if (minibatch_size < 1) throw InvalidParameter("minibatch_size must be at least 1");
  if (rollout_length < 1) throw InvalidParameter("rollout_length must be at least 1");
  if (!(learning_rate > 0.0)) throw InvalidParameter("learning_rate must be positive");
  if (total_steps < rollout_length) throw InvalidParameter("total_steps must be >= rollout_length");
}

void RolloutBuffer::clear() {
  states.clear();
  actions.clear();
  rewards.clear();
  dones.clear();
  values.clear();
  log_probs.clear();
  bootstrap_value = 0.0;
}

void RolloutBuffer::push(int state, int action, double reward, bool done, double value,
                         double log_prob) {
  states.push_back(state);
  actions.push_back(action);
  rewards.push_back(reward);
  dones.push_back(done ? 1 : 0);
  values.push_back(value);
  log_probs.push_back(log_prob);
}

void RolloutBuffer::validate() const {
  const std::size_t n = states.size();
  if (actions.size() != n || rewards.size() != n || dones.size() != n || values.size() != n ||
      log_probs.size() != n) {
    throw InvalidBuffer("rollout buffer arrays differ in length");
  }
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw InvalidBuffer("GAE inputs differ in length");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * live - values[i];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
    next_value = values[i];
  }
  return out;
}

void normalize_advantages(std::span<double> adv) {
  if (adv.empty()) return;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double std = std::sqrt(var / n);
  const double scale = std > 1e-12 ? 1.0 / std : 1.0;
  for (double& a : adv) a = (a - mean) * scale;
}

ActionPair log_prob_gradient(const ActionPair& logits, int action) {
  const ActionPair p = softmax_probs(logits);
  ActionPair g{-p[0], -p[1]};
  g[action] += 1.0;
  return g;
}

namespace {

double clipped(double rho, double eps) { return std::clamp(rho, 1.0 - eps, 1.0 + eps); }

}  // namespace

SurrogateTerms surrogate_objective(const SoftmaxPolicy& policy, const RolloutBuffer& buffer,
                                   std::span<const double> advantages,
                                   std::span<const std::size_t> batch, const PpoConfig& cfg) {
  SurrogateTerms t;
  if (batch.empty()) return t;
  for (std::size_t i : batch) {
    const int s = buffer.states[i];
    const double logp = policy.log_prob(s, buffer.actions[i]);
    const double rho = std::exp(logp - buffer.log_probs[i]);
    const double a = advantages[i];
    const double unclipped = rho * a;
    const double clip_term = clipped(rho, cfg.clip_epsilon) * a;
    t.surrogate += std::min(unclipped, clip_term);
    if (std::abs(rho - 1.0) > cfg.clip_epsilon) t.clip_fraction += 1.0;
    t.approx_kl += buffer.log_probs[i] - logp;
    const ActionPair p = policy.probs(s);
    t.entropy += entropy(p);
  }
  const double n = static_cast<double>(batch.size());
  t.surrogate /= n;
  t.entropy /= n;
  t.clip_fraction /= n;
  t.approx_kl /= n;
  t.objective = t.surrogate + cfg.entropy_coef * t.entropy;
  return t;
}

std::vector<ActionPair> surrogate_gradient(const SoftmaxPolicy& policy, const RolloutBuffer& buffer,
                                           std::span<const double> advantages,
                                           std::span<const std::size_t> batch, const PpoConfig& cfg) {
  std::vector<ActionPair> grad(policy.logits().size(), ActionPair{0.0, 0.0});
  if (batch.empty()) return grad;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    const int s = buffer.states[i];
    const int act = buffer.actions[i];
    const ActionPair& z = policy.logits()[s];
    const ActionPair p = softmax_probs(z);
    const double rho = std::exp(policy.log_prob(s, act) - buffer.log_probs[i]);
    const double a = advantages[i];

    // min() selects the clipped branch only when it is strictly smaller,
    // and that branch is flat in rho outside [1-eps, 1+eps].
    const bool flat = (a > 0.0 && rho > 1.0 + cfg.clip_epsilon) ||
                      (a < 0.0 && rho < 1.0 - cfg.clip_epsilon);
    if (!flat) {
      const double coef = rho * a * inv_n;
      grad[s][act] += coef;
      grad[s][0] -= coef * p[0];
      grad[s][1] -= coef * p[1];
    }

    // dH/dz_j = -p_j (log p_j + H)
    const double h = entropy(p);
    for (int j = 0; j < 2; ++j) {
      const double lp = p[j] > 0.0 ? std::log(p[j]) : 0.0;
      grad[s][j] += cfg.entropy_coef * inv_n * (-p[j] * (lp + h));
    }
  }
  return grad;
}

TabularOptimizer::TabularOptimizer(const PpoConfig& cfg, std::size_t states)
    : kind_(cfg.optimizer),
      lr_(cfg.learning_rate),
      value_coef_(cfg.value_coef),
      beta1_(cfg.adam_beta1),
      beta2_(cfg.adam_beta2),
      eps_(cfg.adam_epsilon) {
  if (kind_ == OptimizerKind::Adam) {
    m_logit_.assign(states, ActionPair{0.0, 0.0});
    v_logit_.assign(states, ActionPair{0.0, 0.0});
    m_value_.assign(states, 0.0);
    v_value_.assign(states, 0.0);
  }
}

void TabularOptimizer::step(SoftmaxPolicy& policy, const std::vector<ActionPair>& logit_ascent,
                            const std::vector<double>& value_descent) {
  auto& logits = policy.logits();
  auto& values = policy.values();
  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t s = 0; s < logits.size(); ++s) {
      logits[s][0] += lr_ * logit_ascent[s][0];
      logits[s][1] += lr_ * logit_ascent[s][1];
      values[s] -= lr_ * value_coef_ * value_descent[s];
    }
    return;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto adam = [&](double g, double& m, double& v) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g * g;
    return lr_ * (m / c1) / (std::sqrt(v / c2) + eps_);
  };
  for (std::size_t s = 0; s < logits.size(); ++s) {
    for (int j = 0; j < 2; ++j) {
      logits[s][j] += adam(logit_ascent[s][j], m_logit_[s][j], v_logit_[s][j]);
    }
    values[s] -= adam(value_coef_ * value_descent[s], m_value_[s], v_value_[s]);
  }
}

UpdateStats ppo_update(SoftmaxPolicy& policy, const RolloutBuffer& buffer,
                       std::span<const double> advantages, std::span<const double> returns,
                       const PpoConfig& cfg, RngStream& shuffle_rng) {
  TabularOptimizer optimizer(cfg, policy.logits().size());
  return ppo_update(policy, buffer, advantages, returns, cfg, shuffle_rng, optimizer);
}

UpdateStats ppo_update(SoftmaxPolicy& policy, const RolloutBuffer& buffer,
                       std::span<const double> advantages, std::span<const double> returns,
                       const PpoConfig& cfg, RngStream& shuffle_rng, TabularOptimizer& optimizer) {
  buffer.validate();
  const std::size_t n = buffer.size();
  if (advantages.size() != n || returns.size() != n) {
    throw InvalidBuffer("advantage/return arrays do not match the buffer");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t mb = static_cast<std::size_t>(cfg.minibatch_size);

  UpdateStats stats;
  std::vector<double> value_grad(policy.values().size());
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t stop = std::min(n, start + mb);
      std::span<const std::size_t> batch(order.data() + start, stop - start);

      const SurrogateTerms terms = surrogate_objective(policy, buffer, advantages, batch, cfg);
      const auto grad = surrogate_gradient(policy, buffer, advantages, batch, cfg);

      std::fill(value_grad.begin(), value_grad.end(), 0.0);
      double value_loss = 0.0;
      const double inv_b = 1.0 / static_cast<double>(batch.size());
      for (std::size_t i : batch) {
        const int s = buffer.states[i];
        const double err = policy.values()[s] - returns[i];
        value_loss += err * err * inv_b;
        value_grad[s] += 2.0 * err * inv_b;
      }

      for (std::size_t s = 0; s < grad.size(); ++s) {
        if (!std::isfinite(grad[s][0]) || !std::isfinite(grad[s][1]) || !std::isfinite(value_grad[s])) {
          std::ostringstream msg;
          msg << "non-finite gradient at state " << s << " (epoch " << epoch << ", surrogate "
              << terms.surrogate << ", value loss " << value_loss << ")";
          throw TrainingDiverged(msg.str());
        }
      }
      optimizer.step(policy, grad, value_grad);

      stats.surrogate += terms.surrogate;
      stats.entropy += terms.entropy;
      stats.value_loss += value_loss;
      stats.approx_kl += terms.approx_kl;
      stats.clip_fraction += terms.clip_fraction;
      ++stats.minibatches;
    }
  }
  if (stats.minibatches > 0) {
    const double k = static_cast<double>(stats.minibatches);
    stats.surrogate /= k;
    stats.entropy /= k;
    stats.value_loss /= k;
    stats.approx_kl /= k;
    stats.clip_fraction /= k;
  }
  return stats;
}

TrainResult train(const SimConfig& sim, const PpoConfig& cfg, std::uint64_t master_seed,
                  const TrainHooks& hooks) {
  cfg.validate();
  SimConfig env_cfg = sim;
  env_cfg.master_seed = master_seed;
  CallCentreEnv env(env_cfg);

  TrainResult result;
  result.policy = SoftmaxPolicy(env_cfg.max_queue_len);
  SoftmaxPolicy& policy = result.policy;
  RngStream action_rng = derive_stream(mix64(master_seed ^ 0x70706f5f61637473ULL), 0);
  RngStream shuffle_rng = derive_stream(mix64(master_seed ^ 0x70706f5f73687566ULL), 0);

  TabularOptimizer optimizer(cfg, policy.logits().size());
  RolloutBuffer buffer;
  ObsState obs = env.reset(0);
  std::int64_t steps = 0;
  while (steps < cfg.total_steps) {
    buffer.clear();
    if (cfg.anneal_lr) {
      const double remaining = 1.0 - static_cast<double>(steps) / static_cast<double>(cfg.total_steps);
      optimizer.set_learning_rate(cfg.learning_rate * remaining);
    }
    const std::int64_t budget = std::min<std::int64_t>(cfg.rollout_length, cfg.total_steps - steps);
    bool last_done = false;
    for (std::int64_t t = 0; t < budget; ++t) {
      const int s = encode_state(obs, env_cfg.max_queue_len);
      const Action a = policy.sample(s, action_rng);
      const double logp = policy.log_prob(s, a.staff.value);
      const double v = policy.values()[s];
      const StepResult r = env.step(a);
      ++steps;
      buffer.push(s, a.staff.value, r.reward * cfg.reward_scale, r.done, v, logp);
      last_done = r.done;
      if (r.done) {
        result.curve.push_back({steps, env.episode_reward()});
        obs = env.reset();
      } else {
        obs = r.obs;
      }
    }
    buffer.bootstrap_value =
        last_done ? 0.0 : policy.values()[encode_state(obs, env_cfg.max_queue_len)];

    GaeResult gae = compute_gae(buffer.rewards, buffer.values, buffer.dones, buffer.bootstrap_value,
                                cfg.gamma, cfg.gae_lambda);
    normalize_advantages(gae.advantages);
    const UpdateStats stats =
        ppo_update(policy, buffer, gae.advantages, gae.returns, cfg, shuffle_rng, optimizer);
    ++result.updates;
    if (hooks.on_update) hooks.on_update(result.updates, steps, stats);
    if (hooks.on_checkpoint && cfg.checkpoint_every > 0 && result.updates % cfg.checkpoint_every == 0) {
      hooks.on_checkpoint(result.updates, policy);
    }
  }
  return result;
}

}  // namespace callroute
