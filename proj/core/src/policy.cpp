#include "callroute/policy.hpp"

#include <cmath>

#include "callroute/errors.hpp"

namespace callroute {

Action random_act(RngStream& rng, int n_staff) {
  if (n_staff <= 1) return route_to(0);
  return route_to(static_cast<int>(rng.uniform() * n_staff));
}

TabularPolicy::TabularPolicy(TabularPolicyTable table, std::string name)
    : table_(std::move(table)), name_(std::move(name)) {
  const int side = table_.max_queue_len + 1;
  if (static_cast<int>(table_.actions.size()) != side * side * kMaxInquiryTypes) {
    throw InvalidParameter("policy table size does not match max_queue_len");
  }
}

Action TabularPolicy::act(const ObsState& obs, RngStream&) const {
  return table_.actions[encode_state(obs, table_.max_queue_len)];
}

ActionPair softmax_probs(const ActionPair& logits) {
  if (!std::isfinite(logits[0]) || !std::isfinite(logits[1])) {
    throw InvalidParameter("non-finite logits");
  }
  const double hi = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - hi);
  const double e1 = std::exp(logits[1] - hi);
  const double z = e0 + e1;
  return {e0 / z, e1 / z};
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

SoftmaxPolicy::SoftmaxPolicy(int max_queue_len) : max_queue_len_(max_queue_len) {
  const int side = max_queue_len + 1;
  logits_.assign(static_cast<std::size_t>(side * side * kMaxInquiryTypes), ActionPair{0.0, 0.0});
  values_.assign(logits_.size(), 0.0);
}

int SoftmaxPolicy::encode(const ObsState& obs) const {
  return encode_state(obs, max_queue_len_);
}

Action SoftmaxPolicy::sample(int state, RngStream& rng) const {
  const ActionPair p = probs(state);
  if (greedy_) return route_to(p[1] > p[0] ? 1 : 0);
  return route_to(rng.uniform() < p[0] ? 0 : 1);
}

Action SoftmaxPolicy::act(const ObsState& obs, RngStream& rng) const {
  return sample(encode(obs), rng);
}

double SoftmaxPolicy::log_prob(int state, int action) const {
  const auto& z = logits_[state];
  const double hi = std::max(z[0], z[1]);
  const double lse = hi + std::log(std::exp(z[0] - hi) + std::exp(z[1] - hi));
  return z[action] - lse;
}

std::optional<double> SoftmaxPolicy::log_prob(const ObsState& obs, Action a) const {
  if (a.staff.value < 0 || a.staff.value > 1) throw InvalidAction("action outside {0, 1}");
  return log_prob(encode(obs), a.staff.value);
}

}  // namespace callroute
