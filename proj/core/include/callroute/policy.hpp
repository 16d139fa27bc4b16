#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "callroute/domain.hpp"
#include "callroute/random.hpp"
#include "callroute/value_iteration.hpp"

namespace callroute {

// Common routing-policy contract used by eval, ppo and the CLI.
// Implementations are read-only during act() and safe to share.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const ObsState& obs, RngStream& rng) const = 0;
  virtual std::optional<double> log_prob(const ObsState&, Action) const { return std::nullopt; }
  virtual std::string name() const = 0;
};

Action random_act(RngStream& rng, int n_staff = 2);

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(int n_staff = 2) : n_staff_(n_staff) {}
  Action act(const ObsState&, RngStream& rng) const override { return random_act(rng, n_staff_); }
  std::string name() const override { return "random"; }

 private:
  int n_staff_;
};

class TabularPolicy final : public Policy {
 public:
  TabularPolicy(TabularPolicyTable table, std::string name = "tabular");
  Action act(const ObsState& obs, RngStream& rng) const override;
  std::string name() const override { return name_; }
  const TabularPolicyTable& table() const noexcept { return table_; }

 private:
  TabularPolicyTable table_;
  std::string name_;
};

using ActionPair = std::array<double, 2>;

// Max-subtracted softmax. Throws InvalidParameter on non-finite logits.
ActionPair softmax_probs(const ActionPair& logits);
double entropy(std::span<const double> probs);

// Tabular softmax policy over decision states with a matching value
// baseline. Stochastic by default; greedy mode takes the argmax.
class SoftmaxPolicy final : public Policy {
 public:
  SoftmaxPolicy() = default;
  explicit SoftmaxPolicy(int max_queue_len);

  Action act(const ObsState& obs, RngStream& rng) const override;
  std::optional<double> log_prob(const ObsState& obs, Action a) const override;
  std::string name() const override { return greedy_ ? "ppo-greedy" : "ppo"; }

  Action sample(int state, RngStream& rng) const;
  double log_prob(int state, int action) const;
  ActionPair probs(int state) const { return softmax_probs(logits_[state]); }

  int max_queue_len() const noexcept { return max_queue_len_; }
  int state_count() const noexcept { return static_cast<int>(logits_.size()); }
  std::vector<ActionPair>& logits() noexcept { return logits_; }
  const std::vector<ActionPair>& logits() const noexcept { return logits_; }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool greedy() const noexcept { return greedy_; }
  void set_greedy(bool on) noexcept { greedy_ = on; }

 private:
  int encode(const ObsState& obs) const;

  int max_queue_len_ = 0;
  std::vector<ActionPair> logits_;
  std::vector<double> values_;
  bool greedy_ = false;
};

// Policy files (JSON):
//   format "callroute-policy/1", indexing tag, max_queue_len, state_count,
//   mode "deterministic" with "actions", or mode "logits" with "logits"
//   (pairs) and "values".
std::string policy_to_json(const TabularPolicyTable& table);
std::string policy_to_json(const SoftmaxPolicy& policy);
void write_policy_file(const std::string& path, const TabularPolicyTable& table);
void write_policy_file(const std::string& path, const SoftmaxPolicy& policy);

// Throws SchemaError naming the offending field.
std::unique_ptr<Policy> policy_from_json(const std::string& text, const std::string& name = "");
std::unique_ptr<Policy> load_policy_file(const std::string& path);

}  // namespace callroute
