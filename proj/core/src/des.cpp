#include "callroute/des.hpp"

#include <cmath>

#include "callroute/errors.hpp"

namespace callroute {

const char* to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::Arrival: return "arrival";
    case EventKind::Departure: return "departure";
    case EventKind::Abandonment: return "abandonment";
  }
  return "unknown";
}

std::uint64_t EventQueue::schedule(Event e) {
  if (!(e.time >= now_)) {
    throw InternalConsistency("event scheduled into the past: t=" + std::to_string(e.time) +
                              " < now=" + std::to_string(now_));
  }
  e.seq = next_seq_++;
  heap_.push(e);
  return e.seq;
}

std::optional<Event> EventQueue::pop_next() {
  if (heap_.empty()) return std::nullopt;
  Event e = heap_.top();
  heap_.pop();
  now_ = e.time;
  return e;
}

namespace {

enum Substream : std::uint64_t { kArrival0 = 0, kArrival1 = 1, kService = 2, kAbandon = 3 };

}  // namespace

Engine::Engine(SimConfig cfg, RngStream episode_stream)
    : cfg_(std::move(cfg)),
      arrival_rng_{derive_stream(episode_stream.state(), kArrival0),
                   derive_stream(episode_stream.state(), kArrival1)},
      service_rng_(derive_stream(episode_stream.state(), kService)),
      abandon_rng_(derive_stream(episode_stream.state(), kAbandon)),
      staff_(static_cast<std::size_t>(cfg_.n_staff)),
      idle_count_(cfg_.n_staff) {
  cfg_.validate();
}

void Engine::start() {
  for (int t = 0; t < cfg_.n_types(); ++t) {
    const double first = sample_exponential(arrival_rng_[t], cfg_.inter_arrival_mean[t]);
    if (first < cfg_.episode_length) queue_.schedule(Event::arrival(first, inquiry_from_index(t)));
  }
}

void Engine::integrate_to(double t) {
  const double prev = now();
  if (t <= prev) return;
  charged_wait_ += static_cast<double>(waiting_count_) * (t - prev);
  const double idle_span = clip(t) - clip(prev);
  if (idle_span > 0.0) charged_idle_ += static_cast<double>(idle_count_) * idle_span;
}

void Engine::close_books() {
  integrate_to(std::max(now(), cfg_.episode_length));
  for (auto& st : staff_) {
    if (st.idle_since) {
      st.idle_accum += std::max(0.0, cfg_.episode_length - clip(*st.idle_since));
      st.idle_since.reset();
    }
  }
  drained_ = true;
}

std::optional<Event> Engine::pop_next() {
  if (drained_) return std::nullopt;
  if (pending_arrival_) {
    throw InternalConsistency("pending arrival must be routed before advancing the clock");
  }
  const Event* next = queue_.peek();
  if (next == nullptr) {
    close_books();
    return std::nullopt;
  }
  integrate_to(next->time);
  auto e = queue_.pop_next();
  current_seq_ = e->seq;
  if (e->kind == EventKind::Arrival) pending_arrival_ = e->inquiry;
  return e;
}

void Engine::start_service(StaffState& st, StaffId s, Client& c) {
  if (st.idle_since) {
    st.idle_accum += std::max(0.0, clip(now()) - clip(*st.idle_since));
    st.idle_since.reset();
    --idle_count_;
  }
  st.in_service = c.id;
  c.status = ClientStatus::InService;
  c.service_start = now();
  const double service =
      sample_exponential(service_rng_, cfg_.service_mean[s.value][to_index(c.inquiry)]);
  queue_.schedule(Event::departure(now() + service, s));
}

ArrivalOutcome Engine::handle_arrival(InquiryType inquiry, Action action) {
  if (!pending_arrival_ || *pending_arrival_ != inquiry) {
    throw InternalConsistency("no pending arrival of this inquiry type");
  }
  const int s = action.staff.value;
  if (s < 0 || s >= cfg_.n_staff) {
    throw InvalidAction("route target " + std::to_string(s) + " outside [0, " +
                        std::to_string(cfg_.n_staff) + ")");
  }
  pending_arrival_.reset();

  const int t = to_index(inquiry);
  const double next = now() + sample_exponential(arrival_rng_[t], cfg_.inter_arrival_mean[t]);
  if (next < cfg_.episode_length) queue_.schedule(Event::arrival(next, inquiry));

  Client c;
  c.id = static_cast<ClientId>(clients_.size());
  c.inquiry = inquiry;
  c.arrival_time = now();
  c.assigned = action.staff;
  clients_.push_back(c);
  Client& client = clients_.back();
  StaffState& st = staff_[s];

  ArrivalOutcome outcome;
  if (!st.in_service) {
    start_service(st, action.staff, client);
    outcome = ArrivalOutcome::StartedService;
  } else if (st.queue_length() < cfg_.max_queue_len) {
    st.fifo.push_back(client.id);
    ++waiting_count_;
    const double patience = sample_exponential(abandon_rng_, cfg_.abandonment_mean[t]);
    if (std::isfinite(patience)) queue_.schedule(Event::abandonment(now() + patience, client.id));
    outcome = ArrivalOutcome::Queued;
  } else {
    client.status = ClientStatus::Rejected;
    client.exit_time = now();
    ++rejected_;
    outcome = ArrivalOutcome::Rejected;
  }
  record(outcome == ArrivalOutcome::Rejected ? "rejection" : "arrival", client.id, s);
  return outcome;
}

void Engine::handle_departure(StaffId staff) {
  StaffState& st = staff_.at(staff.value);
  if (!st.in_service) {
    throw InternalConsistency("departure for idle staff " + std::to_string(staff.value));
  }
  Client& done = clients_[*st.in_service];
  done.status = ClientStatus::Served;
  done.exit_time = now();
  ++served_;
  const ClientId departed = done.id;
  st.in_service.reset();

  if (!st.fifo.empty()) {
    const ClientId head = st.fifo.front();
    st.fifo.pop_front();
    --waiting_count_;
    start_service(st, staff, clients_[head]);
  } else {
    st.idle_since = now();
    ++idle_count_;
  }
  record("departure", departed, staff.value);
}

bool Engine::handle_abandonment(ClientId id) {
  if (id < 0 || id >= static_cast<ClientId>(clients_.size())) {
    throw InternalConsistency("abandonment for unknown client " + std::to_string(id));
  }
  Client& c = clients_[id];
  if (c.status != ClientStatus::Waiting) return false;
  auto& fifo = staff_[c.assigned.value].fifo;
  for (auto it = fifo.begin(); it != fifo.end(); ++it) {
    if (*it == id) {
      fifo.erase(it);
      break;
    }
  }
  --waiting_count_;
  c.status = ClientStatus::Abandoned;
  c.exit_time = now();
  ++abandoned_;
  record("abandonment", id, c.assigned.value);
  return true;
}

void Engine::apply_background(const Event& e) {
  switch (e.kind) {
    case EventKind::Departure: handle_departure(e.staff); break;
    case EventKind::Abandonment: handle_abandonment(e.client); break;
    case EventKind::Arrival:
      throw InternalConsistency("arrivals need a routing decision");
  }
}

ObsState Engine::observe(InquiryType tau) const {
  ObsState obs;
  obs.n0 = staff_[0].queue_length();
  obs.n1 = cfg_.n_staff > 1 ? staff_[1].queue_length() : 0;
  obs.tau = tau;
  return obs;
}

void Engine::record(const char* kind, ClientId client, int staff) {
  if (!tracing_) return;
  TraceRecord r;
  r.time = now();
  r.seq = current_seq_;
  r.kind = kind;
  r.client = client;
  r.staff = staff;
  r.queue_lengths.reserve(staff_.size());
  for (const auto& st : staff_) r.queue_lengths.push_back(st.queue_length());
  trace_.push_back(std::move(r));
}

}  // namespace callroute
