#include "callroute/value_iteration.hpp"

#include <cmath>
#include <limits>

#include "callroute/errors.hpp"

namespace callroute {

double q_value(const ActionEntry& entry, std::span<const double> values, double gamma) {
  double expect = 0.0;
  for (const auto& t : entry.transitions) expect += t.prob * values[t.next];
  return entry.reward + gamma * expect;
}

ValueTable bellman_backup(const MdpModel& model, std::span<const double> values, double gamma) {
  ValueTable next(values.size());
  for (int s = 0; s < model.state_count(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& e : model.actions(s)) best = std::max(best, q_value(e, values, gamma));
    next[s] = best;
  }
  return next;
}

ViResult value_iteration(const MdpModel& model, double gamma, double tol, int max_iter) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidParameter("discount must lie in [0, 1)");
  if (!(tol > 0.0)) throw InvalidParameter("tolerance must be positive");

  ViResult out;
  out.values.assign(static_cast<std::size_t>(model.state_count()), 0.0);
  double residual = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= max_iter; ++k) {
    ValueTable next = bellman_backup(model, out.values, gamma);
    residual = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      residual = std::max(residual, std::abs(next[i] - out.values[i]));
    }
    out.values = std::move(next);
    out.residual_history.push_back(residual);
    out.iterations = k;
    out.residual = residual;
    if (!std::isfinite(residual)) break;
    if (residual < tol) return out;
  }
  throw NonConvergence(out.iterations, residual);
}

TabularPolicyTable extract_policy(const MdpModel& model, std::span<const double> values, double gamma) {
  const int m = model.max_queue_len();
  const int side = m + 1;
  TabularPolicyTable policy;
  policy.max_queue_len = m;
  policy.actions.resize(static_cast<std::size_t>(side * side * kMaxInquiryTypes));
  for (int d = 0; d < static_cast<int>(policy.actions.size()); ++d) {
    const int s = model.model_index_of_decision(d);
    int best_action = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (const auto& e : model.actions(s)) {
      const double q = q_value(e, values, gamma);
      if (q > best_q) {  // strict: ties keep the lower id
        best_q = q;
        best_action = e.action;
      }
    }
    policy.actions[d] = route_to(best_action);
  }
  return policy;
}

}  // namespace callroute
