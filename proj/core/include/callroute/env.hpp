#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "callroute/des.hpp"
#include "callroute/domain.hpp"

namespace callroute {

// Cost charged for routing to a full queue and for each abandonment.
inline constexpr double kSimulationPenalty = 125.0;

struct StepInfo {
  std::int64_t abandonments = 0;
  bool rejected = false;
  double interval_idle = 0.0;
  double interval_wait = 0.0;
};

struct StepResult {
  ObsState obs;  // state at the next pending arrival
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Costs accrued since the last emitted reward.
struct CostAccumulator {
  double last_epoch = 0.0;
  std::int64_t pending_abandon_penalties = 0;
  double interval_idle = 0.0;
  double interval_wait = 0.0;
};

// reset/step view of the engine. Each step routes the pending arrival,
// then runs background departures and abandonments until the next
// arrival (or drain). The reward covers every cost accrued in between;
// costs before the first decision are attached to the first step.
class CallCentreEnv {
 public:
  explicit CallCentreEnv(SimConfig cfg);

  // Starts episode `stream_id` (or the next one in sequence) on the
  // stream derived from the master seed.
  ObsState reset(std::optional<std::uint64_t> stream_id = std::nullopt);
  ObsState reset_with_stream(RngStream stream);

  StepResult step(Action action);

  bool done() const noexcept { return done_; }
  const ObsState& observation() const noexcept { return obs_; }
  double episode_reward() const noexcept { return episode_reward_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const SimConfig& config() const noexcept { return cfg_; }
  const Engine& engine() const;

  void set_trace(bool on) noexcept { trace_ = on; }

  EpisodeMetrics finalize_metrics() const;

 private:
  // Runs background events until the next arrival; returns false on drain.
  bool advance_to_decision();
  StepInfo drain_costs();

  SimConfig cfg_;
  std::uint64_t master_seed_;
  std::uint64_t next_stream_ = 0;
  std::unique_ptr<Engine> engine_;
  CostAccumulator acc_;
  double last_idle_ = 0.0;
  double last_wait_ = 0.0;
  std::int64_t last_abandoned_ = 0;
  ObsState obs_;
  double episode_reward_ = 0.0;
  bool done_ = true;
  bool trace_ = false;
};

// Per-episode metrics CSV.
std::string metrics_csv_header(int n_staff);
std::string metrics_csv_row(const EpisodeMetrics& m);

void write_trace_csv(std::ostream& out, const Engine& engine);

}  // namespace callroute
