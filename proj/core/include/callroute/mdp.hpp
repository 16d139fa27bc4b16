#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "callroute/domain.hpp"

namespace callroute {

enum class Phase : std::uint8_t { ArrivalT0 = 0, ArrivalT1 = 1, Internal = 2 };

constexpr bool is_arrival(Phase p) noexcept { return p != Phase::Internal; }

struct TheoreticalState {
  int n0 = 0;
  int n1 = 0;
  Phase phase = Phase::ArrivalT0;
  friend constexpr bool operator==(const TheoreticalState&, const TheoreticalState&) = default;
};

struct Transition {
  int next = 0;
  double prob = 0.0;
};

// One available action in one state. action is -1 for the Internal no-op.
struct ActionEntry {
  int action = -1;
  double reward = 0.0;
  std::vector<Transition> transitions;
};

// Event rates out of a queue configuration (per second).
struct RateVector {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double mu0 = 0.0;
  double mu1 = 0.0;
  double theta_bar = 0.0;  // aggregate per-client abandonment rate
  double abandon0 = 0.0;   // max(n0 - 1, 0) * theta_bar
  double abandon1 = 0.0;

  double total() const noexcept { return lambda0 + lambda1 + mu0 + mu1 + abandon0 + abandon1; }
};

// Explicit finite MDP. Embedded mode has (M+1)^2 * 3 states indexed
// (n0 * (M+1) + n1) * 3 + phase; literal mode has only the two arrival
// phases and uses the decision-state indexing directly.
class MdpModel {
 public:
  MdpModel(TransitionModel mode, int max_queue_len);

  TransitionModel mode() const noexcept { return mode_; }
  int max_queue_len() const noexcept { return max_queue_len_; }
  int phases() const noexcept { return mode_ == TransitionModel::Embedded ? 3 : 2; }
  int state_count() const noexcept { return static_cast<int>(actions_.size()); }

  int index_of(const TheoreticalState& s) const;
  TheoreticalState state_at(int index) const;

  // Maps a decision state (ObsState index) to the model state index.
  int model_index_of_decision(int decision_index) const;

  const std::vector<ActionEntry>& actions(int state) const { return actions_.at(state); }
  std::vector<ActionEntry>& mutable_actions(int state) { return actions_.at(state); }

 private:
  TransitionModel mode_;
  int max_queue_len_;
  std::vector<std::vector<ActionEntry>> actions_;
};

// Penalty for a full queue or for loading a busy staff while the other
// idles: the mean of the staff mean service times, rounded.
double theoretical_penalty(const SimConfig& cfg);

double reward_theoretical(const TheoreticalState& s, Action a, const SimConfig& cfg);

RateVector event_rates(int n0, int n1, const SimConfig& cfg);

// Requires a two-staff configuration.
MdpModel build_model(const SimConfig& cfg, TransitionModel mode);

// Line-oriented dump: "state n0 n1 phase | action a reward r | next:prob ...".
std::string dump_model(const MdpModel& model);

}  // namespace callroute
