#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "callroute/domain.hpp"
#include "callroute/policy.hpp"

namespace callroute {

enum class Metric : std::uint8_t {
  TotalReward,
  Served,
  Abandoned,
  Rejected,
  WaitingTime,
  Idle0,
  Idle1,
};

const char* metric_name(Metric m) noexcept;
bool higher_is_better(Metric m) noexcept;
double metric_value(const EpisodeMetrics& e, Metric m);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;     // sample standard deviation
  double ci95 = 0.0;       // normal-approximation half-width
};

// Order-fixed compensated summary of a sample.
MetricSummary summarize(const std::vector<double>& xs);

struct AggregateReport {
  std::string policy_name;
  int episodes = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t first_episode = 0;
  MetricSummary total_reward;
  MetricSummary served;
  MetricSummary abandoned;
  MetricSummary rejected;
  MetricSummary waiting_time;
  std::vector<MetricSummary> idle;  // per staff
  std::vector<EpisodeMetrics> per_episode;

  const MetricSummary& summary(Metric m) const;
  std::vector<Metric> metrics() const;
};

// Runs episodes first_episode .. first_episode+n-1 of master_seed (common
// random numbers across policies). The policy draws from its own
// per-episode stream. Results do not depend on `jobs`.
// Policy-randomness stream for one evaluation episode; disjoint from the
// simulator's own substreams.
RngStream eval_policy_stream(std::uint64_t master_seed, std::uint64_t episode) noexcept;

AggregateReport evaluate(const SimConfig& sim, const Policy& policy, int n_episodes,
                         std::uint64_t master_seed, int jobs = 1, std::uint64_t first_episode = 0);

// Per-episode difference (a - b) for a metric on matched episodes.
MetricSummary paired_difference(const AggregateReport& a, const AggregateReport& b, Metric m);

struct ComparisonRow {
  Metric metric;
  std::vector<double> means;
  std::vector<double> delta_vs_first;
  std::string ordering;  // e.g. "ppo > vi > random", best first
};

struct ComparisonTable {
  std::vector<std::string> policies;
  std::vector<ComparisonRow> rows;
};

// Throws Incomparable on fewer than two reports or mismatched episodes.
ComparisonTable compare(const std::vector<AggregateReport>& reports);
std::string render_comparison(const ComparisonTable& table);

std::string report_to_json(const AggregateReport& r);
std::string report_to_csv(const AggregateReport& r);
std::string episodes_to_csv(const AggregateReport& r);

}  // namespace callroute
