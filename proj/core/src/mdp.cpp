#include "callroute/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "callroute/errors.hpp"

namespace callroute {

MdpModel::MdpModel(TransitionModel mode, int max_queue_len)
    : mode_(mode), max_queue_len_(max_queue_len) {
  const int side = max_queue_len + 1;
  actions_.resize(static_cast<std::size_t>(side * side * phases()));
}

int MdpModel::index_of(const TheoreticalState& s) const {
  const int m = max_queue_len_;
  if (s.n0 < 0 || s.n0 > m || s.n1 < 0 || s.n1 > m) {
    throw InvalidState("theoretical state queue length out of range");
  }
  const int phase = static_cast<int>(s.phase);
  if (phase >= phases()) throw InvalidState("phase not present in this transition model");
  return (s.n0 * (m + 1) + s.n1) * phases() + phase;
}

TheoreticalState MdpModel::state_at(int index) const {
  if (index < 0 || index >= state_count()) throw InvalidState("model state index out of range");
  const int side = max_queue_len_ + 1;
  TheoreticalState s;
  s.phase = static_cast<Phase>(index % phases());
  const int cell = index / phases();
  s.n0 = cell / side;
  s.n1 = cell % side;
  return s;
}

int MdpModel::model_index_of_decision(int decision_index) const {
  const int side = max_queue_len_ + 1;
  if (decision_index < 0 || decision_index >= side * side * kMaxInquiryTypes) {
    throw InvalidState("decision state index out of range");
  }
  const int tau = decision_index % kMaxInquiryTypes;
  const int cell = decision_index / kMaxInquiryTypes;
  return cell * phases() + tau;
}

namespace {

void require_two_staff(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.n_staff != 2) throw InvalidConfig("n_staff", "the theoretical model needs exactly 2 staff");
}

}  // namespace

double theoretical_penalty(const SimConfig& cfg) {
  double sum = 0.0;
  for (int s = 0; s < cfg.n_staff; ++s) sum += staff_mean_service(cfg, StaffId{s});
  return std::round(sum / cfg.n_staff);
}

double reward_theoretical(const TheoreticalState& s, Action a, const SimConfig& cfg) {
  if (!is_arrival(s.phase)) throw NoReward("internal-phase states carry no routing reward");
  const int target = a.staff.value;
  if (target < 0 || target > 1) throw InvalidAction("theoretical model routes to staff 0 or 1");
  const int assigned = target == 0 ? s.n0 : s.n1;
  const int other = target == 0 ? s.n1 : s.n0;
  const double penalty = theoretical_penalty(cfg);
  if (assigned >= cfg.max_queue_len) return -penalty;
  if (assigned > 0 && other == 0) return -penalty;
  return 0.0 - static_cast<double>(assigned) * staff_mean_service(cfg, a.staff);
}

RateVector event_rates(int n0, int n1, const SimConfig& cfg) {
  if (n0 < 0 || n1 < 0 || n0 > cfg.max_queue_len || n1 > cfg.max_queue_len) {
    throw InvalidState("queue lengths out of range");
  }
  RateVector r;
  r.lambda0 = 1.0 / cfg.inter_arrival_mean[0];
  r.lambda1 = cfg.n_types() > 1 ? 1.0 / cfg.inter_arrival_mean[1] : 0.0;
  r.mu0 = n0 > 0 ? 1.0 / staff_mean_service(cfg, StaffId{0}) : 0.0;
  r.mu1 = n1 > 0 ? 1.0 / staff_mean_service(cfg, StaffId{1}) : 0.0;
  const double lambda = r.lambda0 + r.lambda1;
  r.theta_bar = r.lambda0 / lambda / cfg.abandonment_mean[0];
  if (cfg.n_types() > 1) r.theta_bar += r.lambda1 / lambda / cfg.abandonment_mean[1];
  r.abandon0 = std::max(n0 - 1, 0) * r.theta_bar;
  r.abandon1 = std::max(n1 - 1, 0) * r.theta_bar;
  return r;
}

namespace {

void add_transition(std::vector<Transition>& out, int next, double prob) {
  if (prob <= 0.0) return;
  for (auto& t : out) {
    if (t.next == next) {
      t.prob += prob;
      return;
    }
  }
  out.push_back({next, prob});
}

// Competing exponential clocks out of queue configuration (n0, n1).
std::vector<Transition> next_event_branching(const MdpModel& model, int n0, int n1,
                                             const SimConfig& cfg) {
  const RateVector r = event_rates(n0, n1, cfg);
  const double z = r.total();
  std::vector<Transition> out;
  add_transition(out, model.index_of({n0, n1, Phase::ArrivalT0}), r.lambda0 / z);
  add_transition(out, model.index_of({n0, n1, Phase::ArrivalT1}), r.lambda1 / z);
  if (n0 > 0) add_transition(out, model.index_of({n0 - 1, n1, Phase::Internal}), (r.mu0 + r.abandon0) / z);
  if (n1 > 0) add_transition(out, model.index_of({n0, n1 - 1, Phase::Internal}), (r.mu1 + r.abandon1) / z);
  return out;
}

}  // namespace

MdpModel build_model(const SimConfig& cfg, TransitionModel mode) {
  require_two_staff(cfg);
  const int m = cfg.max_queue_len;
  MdpModel model(mode, m);
  for (int idx = 0; idx < model.state_count(); ++idx) {
    const TheoreticalState s = model.state_at(idx);
    auto& entries = model.mutable_actions(idx);
    if (!is_arrival(s.phase)) {
      ActionEntry noop;
      noop.transitions = next_event_branching(model, s.n0, s.n1, cfg);
      entries.push_back(std::move(noop));
      continue;
    }
    for (int a = 0; a < 2; ++a) {
      ActionEntry e;
      e.action = a;
      e.reward = reward_theoretical(s, route_to(a), cfg);
      int n0 = s.n0, n1 = s.n1;
      int& target = a == 0 ? n0 : n1;
      if (target < m) ++target;
      if (mode == TransitionModel::Literal) {
        e.transitions.push_back({model.index_of({n0, n1, s.phase}), 1.0});
      } else {
        e.transitions = next_event_branching(model, n0, n1, cfg);
      }
      entries.push_back(std::move(e));
    }
  }
  return model;
}

std::string dump_model(const MdpModel& model) {
  static const char* kPhase[] = {"arrival0", "arrival1", "internal"};
  std::ostringstream out;
  char buf[64];
  for (int idx = 0; idx < model.state_count(); ++idx) {
    const auto s = model.state_at(idx);
    for (const auto& e : model.actions(idx)) {
      out << "state " << idx << ' ' << s.n0 << ' ' << s.n1 << ' ' << kPhase[static_cast<int>(s.phase)]
          << " | action " << e.action;
      std::snprintf(buf, sizeof buf, "%.17g", e.reward);
      out << " reward " << buf << " |";
      for (const auto& t : e.transitions) {
        std::snprintf(buf, sizeof buf, "%.17g", t.prob);
        out << ' ' << t.next << ':' << buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace callroute
