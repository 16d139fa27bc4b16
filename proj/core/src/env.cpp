#include "callroute/env.hpp"

#include <cstdio>

#include "callroute/errors.hpp"
#include "callroute/random.hpp"

namespace callroute {

CallCentreEnv::CallCentreEnv(SimConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.n_staff > 2) {
    throw InvalidConfig("n_staff", "the routing observation supports at most 2 staff");
  }
  master_seed_ = cfg_.master_seed ? *cfg_.master_seed : entropy_seed();
}

const Engine& CallCentreEnv::engine() const {
  if (!engine_) throw InvalidState("environment has not been reset");
  return *engine_;
}

ObsState CallCentreEnv::reset(std::optional<std::uint64_t> stream_id) {
  const std::uint64_t id = stream_id ? *stream_id : next_stream_;
  next_stream_ = id + 1;
  return reset_with_stream(derive_stream(master_seed_, id));
}

ObsState CallCentreEnv::reset_with_stream(RngStream stream) {
  engine_ = std::make_unique<Engine>(cfg_, stream);
  if (trace_) engine_->enable_trace();
  engine_->start();
  acc_ = CostAccumulator{};
  last_idle_ = last_wait_ = 0.0;
  last_abandoned_ = 0;
  episode_reward_ = 0.0;
  done_ = !advance_to_decision();
  return obs_;
}

bool CallCentreEnv::advance_to_decision() {
  while (auto e = engine_->pop_next()) {
    if (e->kind == EventKind::Arrival) {
      obs_ = engine_->observe(e->inquiry);
      return true;
    }
    engine_->apply_background(*e);
  }
  obs_ = engine_->observe(InquiryType::Type0);
  return false;
}

StepInfo CallCentreEnv::drain_costs() {
  acc_.interval_idle = engine_->charged_idle() - last_idle_;
  acc_.interval_wait = engine_->charged_wait() - last_wait_;
  acc_.pending_abandon_penalties = engine_->abandoned() - last_abandoned_;
  StepInfo info;
  info.abandonments = acc_.pending_abandon_penalties;
  info.interval_idle = acc_.interval_idle;
  info.interval_wait = acc_.interval_wait;

  last_idle_ = engine_->charged_idle();
  last_wait_ = engine_->charged_wait();
  last_abandoned_ = engine_->abandoned();
  acc_ = CostAccumulator{};
  acc_.last_epoch = engine_->now();
  return info;
}

StepResult CallCentreEnv::step(Action action) {
  if (done_ || !engine_) throw EpisodeFinished();
  const auto outcome = engine_->handle_arrival(obs_.tau, action);
  const bool more = advance_to_decision();

  StepResult r;
  r.info = drain_costs();
  r.info.rejected = outcome == ArrivalOutcome::Rejected;
  r.reward = -kSimulationPenalty * (r.info.rejected ? 1.0 : 0.0) -
             kSimulationPenalty * static_cast<double>(r.info.abandonments) -
             r.info.interval_idle - r.info.interval_wait;
  r.done = !more;
  r.obs = obs_;
  done_ = r.done;
  episode_reward_ += r.reward;
  return r;
}

EpisodeMetrics CallCentreEnv::finalize_metrics() const {
  if (!engine_ || !done_ || !engine_->drained()) throw EpisodeNotFinished();
  EpisodeMetrics m;
  m.total_reward = episode_reward_;
  m.arrivals = engine_->arrivals();
  m.served = engine_->served();
  m.abandoned = engine_->abandoned();
  m.rejected = engine_->rejected();
  for (const auto& c : engine_->clients()) {
    if (c.status == ClientStatus::Served) {
      m.wait_sum += *c.service_start - c.arrival_time;
      ++m.wait_count;
    } else if (c.status == ClientStatus::Abandoned) {
      m.abandoned_wait_sum += *c.exit_time - c.arrival_time;
    }
  }
  for (const auto& st : engine_->staff()) m.idle_seconds.push_back(st.idle_accum);
  return m;
}

std::string metrics_csv_header(int n_staff) {
  std::string h =
      "Total Reward,Client Served,Client Abandonment,Client Rejected,Client Waiting time";
  for (int s = 0; s < n_staff; ++s) h += ",Staff " + std::to_string(s) + " idle time";
  return h;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string metrics_csv_row(const EpisodeMetrics& m) {
  std::string row = fmt_double(m.total_reward) + "," + std::to_string(m.served) + "," +
                    std::to_string(m.abandoned) + "," + std::to_string(m.rejected) + "," +
                    fmt_double(m.mean_wait());
  for (double idle : m.idle_seconds) row += "," + fmt_double(idle);
  return row;
}

void write_trace_csv(std::ostream& out, const Engine& engine) {
  out << "time,seq,kind,client_id,staff";
  for (int s = 0; s < engine.config().n_staff; ++s) out << ",queue" << s;
  out << '\n';
  for (const auto& r : engine.trace()) {
    out << fmt_double(r.time) << ',' << r.seq << ',' << r.kind << ',' << r.client << ','
        << r.staff;
    for (int q : r.queue_lengths) out << ',' << q;
    out << '\n';
  }
}

}  // namespace callroute
