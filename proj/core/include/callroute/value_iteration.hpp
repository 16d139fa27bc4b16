#pragma once

#include <span>
#include <vector>

#include "callroute/domain.hpp"
#include "callroute/mdp.hpp"

namespace callroute {

using ValueTable = std::vector<double>;

// One action per decision state, in encode_state order.
struct TabularPolicyTable {
  int max_queue_len = 0;
  std::vector<Action> actions;
};

struct ViResult {
  ValueTable values;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;  // sup-norm change after each sweep
};

// Synchronous (Jacobi) Bellman-optimality sweeps from V = 0 until the
// sup-norm change drops below tol. Throws NonConvergence after max_iter.
ViResult value_iteration(const MdpModel& model, double gamma, double tol, int max_iter);

// One synchronous Bellman-optimality backup of `values`.
ValueTable bellman_backup(const MdpModel& model, std::span<const double> values, double gamma);

double q_value(const ActionEntry& entry, std::span<const double> values, double gamma);

// Greedy policy over arrival states; ties go to the lower staff id.
TabularPolicyTable extract_policy(const MdpModel& model, std::span<const double> values, double gamma);

}  // namespace callroute
