#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "callroute/domain.hpp"
#include "callroute/random.hpp"

namespace callroute {

using ClientId = std::int64_t;

enum class EventKind : std::uint8_t { Arrival, Departure, Abandonment };

const char* to_string(EventKind k) noexcept;

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;  // assigned by EventQueue::schedule
  EventKind kind = EventKind::Arrival;
  InquiryType inquiry = InquiryType::Type0;  // Arrival
  StaffId staff;                             // Departure
  ClientId client = -1;                      // Abandonment

  static Event arrival(double t, InquiryType type) {
    Event e;
    e.time = t;
    e.kind = EventKind::Arrival;
    e.inquiry = type;
    return e;
  }
  static Event departure(double t, StaffId s) {
    Event e;
    e.time = t;
    e.kind = EventKind::Departure;
    e.staff = s;
    return e;
  }
  static Event abandonment(double t, ClientId c) {
    Event e;
    e.time = t;
    e.kind = EventKind::Abandonment;
    e.client = c;
    return e;
  }
};

// Min-priority queue on (time, seq) that owns the simulation clock.
class EventQueue {
 public:
  // Returns the assigned seq. Throws InternalConsistency if e.time < now().
  std::uint64_t schedule(Event e);
  // Pops the earliest event and advances the clock to its time.
  std::optional<Event> pop_next();
  const Event* peek() const { return heap_.empty() ? nullptr : &heap_.top(); }

  double now() const noexcept { return now_; }
  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
};

enum class ClientStatus : std::uint8_t { Waiting, InService, Served, Abandoned, Rejected };

struct Client {
  ClientId id = 0;
  InquiryType inquiry = InquiryType::Type0;
  double arrival_time = 0.0;
  std::optional<double> service_start;
  std::optional<double> exit_time;  // departure, abandonment or rejection
  StaffId assigned;
  ClientStatus status = ClientStatus::Waiting;
};

struct StaffState {
  std::optional<ClientId> in_service;
  std::deque<ClientId> fifo;
  std::optional<double> idle_since = 0.0;
  double idle_accum = 0.0;  // idle seconds within [0, episode_length]

  // Queue length as observed by the router: in-service client plus FIFO.
  int queue_length() const noexcept {
    return static_cast<int>(fifo.size()) + (in_service ? 1 : 0);
  }
};

enum class ArrivalOutcome : std::uint8_t { StartedService, Queued, Rejected };

struct TraceRecord {
  double time = 0.0;
  std::uint64_t seq = 0;
  std::string kind;
  ClientId client = -1;
  int staff = -1;
  std::vector<int> queue_lengths;  // after the event
};

// Discrete-event core for one episode. Strictly single-threaded.
//
// Randomness is split into per-purpose substreams (one per arrival type,
// one for service, one for abandonment) derived from the episode stream,
// so competing routing policies see the same arrival process.
class Engine {
 public:
  Engine(SimConfig cfg, RngStream episode_stream);

  // Schedules the first arrival of every inquiry type.
  void start();

  // Pops the next event, integrating idle and waiting costs up to its
  // time. Returns nullopt once drained (and closes the books then).
  std::optional<Event> pop_next();

  ArrivalOutcome handle_arrival(InquiryType inquiry, Action action);
  void handle_departure(StaffId staff);
  // Returns false for a stale timer (client no longer waiting).
  bool handle_abandonment(ClientId client);
  // Dispatches a Departure or Abandonment event.
  void apply_background(const Event& e);

  double now() const noexcept { return queue_.now(); }
  bool drained() const noexcept { return drained_; }
  const SimConfig& config() const noexcept { return cfg_; }

  int queue_length(StaffId s) const { return staff_.at(s.value).queue_length(); }
  ObsState observe(InquiryType tau) const;
  const std::vector<Client>& clients() const noexcept { return clients_; }
  const std::vector<StaffState>& staff() const noexcept { return staff_; }

  std::int64_t arrivals() const noexcept { return static_cast<std::int64_t>(clients_.size()); }
  std::int64_t served() const noexcept { return served_; }
  std::int64_t abandoned() const noexcept { return abandoned_; }
  std::int64_t rejected() const noexcept { return rejected_; }

  // Integral over time of the idle-staff count, clipped to the horizon.
  double charged_idle() const noexcept { return charged_idle_; }
  // Integral over time of the number of clients waiting in FIFOs.
  double charged_wait() const noexcept { return charged_wait_; }

  void enable_trace() { tracing_ = true; }
  const std::vector<TraceRecord>& trace() const noexcept { return trace_; }

 private:
  void integrate_to(double t);
  void close_books();
  void start_service(StaffState& st, StaffId s, Client& c);
  void record(const char* kind, ClientId client, int staff);
  double clip(double t) const noexcept { return t < cfg_.episode_length ? t : cfg_.episode_length; }

  SimConfig cfg_;
  std::array<RngStream, kMaxInquiryTypes> arrival_rng_;
  RngStream service_rng_;
  RngStream abandon_rng_;
  EventQueue queue_;
  std::vector<Client> clients_;
  std::vector<StaffState> staff_;
  std::optional<InquiryType> pending_arrival_;
  std::uint64_t current_seq_ = 0;
  std::int64_t served_ = 0;
  std::int64_t abandoned_ = 0;
  std::int64_t rejected_ = 0;
  std::int64_t waiting_count_ = 0;
  int idle_count_ = 0;
  double charged_idle_ = 0.0;
  double charged_wait_ = 0.0;
  bool drained_ = false;
  bool tracing_ = false;
  std::vector<TraceRecord> trace_;
};

}  // namespace callroute
