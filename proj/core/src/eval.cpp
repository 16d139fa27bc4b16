#include "callroute/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "callroute/env.hpp"
#include "callroute/errors.hpp"

namespace callroute {

namespace {

constexpr std::uint64_t kPolicyStreamTag = 0x706f6c6963790000ULL;

// Neumaier-compensated sum in index order.
double stable_sum(const std::vector<double>& xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

std::vector<double> column(const std::vector<EpisodeMetrics>& eps, Metric m) {
  std::vector<double> xs;
  xs.reserve(eps.size());
  for (const auto& e : eps) xs.push_back(metric_value(e, m));
  return xs;
}

}  // namespace

const char* metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::TotalReward: return "Total Reward";
    case Metric::Served: return "Client Served";
    case Metric::Abandoned: return "Client Abandonment";
    case Metric::Rejected: return "Client Rejected";
    case Metric::WaitingTime: return "Client Waiting time";
    case Metric::Idle0: return "Staff 0 idle time";
    case Metric::Idle1: return "Staff 1 idle time";
  }
  return "?";
}

bool higher_is_better(Metric m) noexcept {
  return m == Metric::TotalReward || m == Metric::Served;
}

double metric_value(const EpisodeMetrics& e, Metric m) {
  switch (m) {
    case Metric::TotalReward: return e.total_reward;
    case Metric::Served: return static_cast<double>(e.served);
    case Metric::Abandoned: return static_cast<double>(e.abandoned);
    case Metric::Rejected: return static_cast<double>(e.rejected);
    case Metric::WaitingTime: return e.mean_wait();
    case Metric::Idle0: return e.idle_seconds.size() > 0 ? e.idle_seconds[0] : 0.0;
    case Metric::Idle1: return e.idle_seconds.size() > 1 ? e.idle_seconds[1] : 0.0;
  }
  return 0.0;
}

MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  s.mean = stable_sum(xs) / n;
  if (xs.size() > 1) {
    std::vector<double> sq;
    sq.reserve(xs.size());
    for (double x : xs) sq.push_back((x - s.mean) * (x - s.mean));
    s.stddev = std::sqrt(stable_sum(sq) / (n - 1.0));
    s.ci95 = 1.959963984540054 * s.stddev / std::sqrt(n);
  }
  return s;
}

const MetricSummary& AggregateReport::summary(Metric m) const {
  switch (m) {
    case Metric::TotalReward: return total_reward;
    case Metric::Served: return served;
    case Metric::Abandoned: return abandoned;
    case Metric::Rejected: return rejected;
    case Metric::WaitingTime: return waiting_time;
    case Metric::Idle0: return idle.at(0);
    case Metric::Idle1: return idle.at(1);
  }
  return total_reward;
}

std::vector<Metric> AggregateReport::metrics() const {
  std::vector<Metric> ms{Metric::TotalReward, Metric::Served, Metric::Abandoned, Metric::Rejected,
                         Metric::WaitingTime};
  if (idle.size() > 0) ms.push_back(Metric::Idle0);
  if (idle.size() > 1) ms.push_back(Metric::Idle1);
  return ms;
}

RngStream eval_policy_stream(std::uint64_t master_seed, std::uint64_t episode) noexcept {
  return derive_stream(master_seed ^ kPolicyStreamTag, episode);
}

AggregateReport evaluate(const SimConfig& sim, const Policy& policy, int n_episodes,
                         std::uint64_t master_seed, int jobs, std::uint64_t first_episode) {
  if (n_episodes < 1) throw InvalidParameter("n_episodes must be at least 1");
  SimConfig cfg = sim;
  cfg.master_seed = master_seed;
  cfg.validate();

  AggregateReport report;
  report.policy_name = policy.name();
  report.episodes = n_episodes;
  report.master_seed = master_seed;
  report.first_episode = first_episode;
  report.per_episode.resize(static_cast<std::size_t>(n_episodes));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    CallCentreEnv env(cfg);
    for (int k = next++; k < n_episodes; k = next++) {
      try {
        const std::uint64_t stream = first_episode + static_cast<std::uint64_t>(k);
        RngStream policy_rng = eval_policy_stream(master_seed, stream);
        ObsState obs = env.reset(stream);
        while (!env.done()) {
          const Action a = policy.act(obs, policy_rng);
          if (a.staff.value < 0 || a.staff.value >= cfg.n_staff) {
            throw InvalidAction("policy '" + policy.name() + "' chose staff " +
                                std::to_string(a.staff.value) + " in state (" +
                                std::to_string(obs.n0) + ", " + std::to_string(obs.n1) + ", " +
                                std::to_string(to_index(obs.tau)) + ")");
          }
          obs = env.step(a).obs;
        }
        report.per_episode[static_cast<std::size_t>(k)] = env.finalize_metrics();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n_episodes;
        return;
      }
    }
  };

  const int workers = std::clamp(jobs, 1, n_episodes);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const auto& eps = report.per_episode;
  report.total_reward = summarize(column(eps, Metric::TotalReward));
  report.served = summarize(column(eps, Metric::Served));
  report.abandoned = summarize(column(eps, Metric::Abandoned));
  report.rejected = summarize(column(eps, Metric::Rejected));
  report.waiting_time = summarize(column(eps, Metric::WaitingTime));
  for (int s = 0; s < cfg.n_staff; ++s) {
    std::vector<double> xs;
    for (const auto& e : eps) xs.push_back(e.idle_seconds[s]);
    report.idle.push_back(summarize(xs));
  }
  return report;
}

namespace {

void require_matched(const AggregateReport& a, const AggregateReport& b) {
  if (a.episodes != b.episodes || a.per_episode.size() != b.per_episode.size()) {
    throw Incomparable("reports '" + a.policy_name + "' and '" + b.policy_name +
                       "' have different episode counts");
  }
  if (a.master_seed != b.master_seed || a.first_episode != b.first_episode) {
    throw Incomparable("reports '" + a.policy_name + "' and '" + b.policy_name +
                       "' were run on different seeds");
  }
}

}  // namespace

MetricSummary paired_difference(const AggregateReport& a, const AggregateReport& b, Metric m) {
  require_matched(a, b);
  std::vector<double> diff;
  diff.reserve(a.per_episode.size());
  for (std::size_t k = 0; k < a.per_episode.size(); ++k) {
    diff.push_back(metric_value(a.per_episode[k], m) - metric_value(b.per_episode[k], m));
  }
  return summarize(diff);
}

ComparisonTable compare(const std::vector<AggregateReport>& reports) {
  if (reports.size() < 2) throw Incomparable("need at least two reports to compare");
  for (std::size_t i = 1; i < reports.size(); ++i) require_matched(reports[0], reports[i]);

  ComparisonTable table;
  for (const auto& r : reports) table.policies.push_back(r.policy_name);
  for (Metric m : reports[0].metrics()) {
    bool present = true;
    for (const auto& r : reports) present = present && r.metrics().size() == reports[0].metrics().size();
    if (!present) continue;
    ComparisonRow row;
    row.metric = m;
    for (const auto& r : reports) {
      row.means.push_back(r.summary(m).mean);
      row.delta_vs_first.push_back(r.summary(m).mean - reports[0].summary(m).mean);
    }
    std::vector<std::size_t> order(reports.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const bool up = higher_is_better(m);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return up ? row.means[x] > row.means[y] : row.means[x] < row.means[y];
    });
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i > 0) row.ordering += row.means[order[i - 1]] == row.means[order[i]] ? " = " : " > ";
      row.ordering += reports[order[i]].policy_name;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_comparison(const ComparisonTable& table) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-22s", "");
  out << buf;
  for (const auto& p : table.policies) {
    std::snprintf(buf, sizeof buf, "%16s", p.c_str());
    out << buf;
  }
  out << "  best first\n";
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof buf, "%-22s", metric_name(row.metric));
    out << buf;
    for (double v : row.means) {
      std::snprintf(buf, sizeof buf, "%16.2f", v);
      out << buf;
    }
    out << "  " << row.ordering << '\n';
  }
  return out.str();
}

std::string report_to_json(const AggregateReport& r) {
  nlohmann::json doc;
  doc["policy"] = r.policy_name;
  doc["episodes"] = r.episodes;
  doc["master_seed"] = r.master_seed;
  doc["first_episode"] = r.first_episode;
  nlohmann::json metrics = nlohmann::json::object();
  for (Metric m : r.metrics()) {
    const auto& s = r.summary(m);
    metrics[metric_name(m)] = {{"mean", s.mean}, {"std", s.stddev}, {"ci95", s.ci95}};
  }
  doc["metrics"] = std::move(metrics);
  return doc.dump(2);
}

std::string report_to_csv(const AggregateReport& r) {
  std::ostringstream out;
  out << "policy,episodes,metric,mean,std,ci95\n";
  char buf[160];
  for (Metric m : r.metrics()) {
    const auto& s = r.summary(m);
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f", s.mean, s.stddev, s.ci95);
    out << r.policy_name << ',' << r.episodes << ',' << metric_name(m) << buf << '\n';
  }
  return out.str();
}

std::string episodes_to_csv(const AggregateReport& r) {
  const int n_staff = r.per_episode.empty() ? 0 : static_cast<int>(r.per_episode[0].idle_seconds.size());
  std::string out = "policy,episode," + metrics_csv_header(n_staff) + "\n";
  for (std::size_t k = 0; k < r.per_episode.size(); ++k) {
    out += r.policy_name + "," + std::to_string(r.first_episode + k) + "," +
           metrics_csv_row(r.per_episode[k]) + "\n";
  }
  return out;
}

}  // namespace callroute
