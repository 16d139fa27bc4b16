#include "callroute/domain.hpp"

#include <cmath>
#include <numeric>

#include "callroute/errors.hpp"

namespace callroute {

InquiryType inquiry_from_index(int i) {
  if (i < 0 || i >= kMaxInquiryTypes) {
    throw InvalidState("inquiry type index out of range: " + std::to_string(i));
  }
  return static_cast<InquiryType>(i);
}

std::string to_string(TransitionModel m) {
  return m == TransitionModel::Embedded ? "embedded" : "literal";
}

TransitionModel transition_model_from_string(const std::string& s) {
  if (s == "embedded") return TransitionModel::Embedded;
  if (s == "literal") return TransitionModel::Literal;
  throw InvalidConfig("transition_model", "expected 'embedded' or 'literal', got '" + s + "'");
}

namespace {

void require_positive(double v, const std::string& field, bool allow_inf = false) {
  if (std::isnan(v) || v <= 0.0 || (!allow_inf && std::isinf(v))) {
    throw InvalidConfig(field, "mean time must be positive and finite, got " + std::to_string(v));
  }
}

}  // namespace

void SimConfig::validate() const {
  const int types = n_types();
  if (types < 1 || types > kMaxInquiryTypes) {
    throw InvalidConfig("inter_arrival_mean", "expected 1 or 2 inquiry types");
  }
  if (static_cast<int>(abandonment_mean.size()) != types) {
    throw InvalidConfig("abandonment_mean", "length must match inter_arrival_mean");
  }
  if (n_staff < 1) throw InvalidConfig("n_staff", "must be at least 1");
  if (static_cast<int>(service_mean.size()) != n_staff) {
    throw InvalidConfig("service_mean", "needs one row per staff member");
  }
  for (int t = 0; t < types; ++t) {
    require_positive(inter_arrival_mean[t], "inter_arrival_mean[" + std::to_string(t) + "]");
    require_positive(abandonment_mean[t], "abandonment_mean[" + std::to_string(t) + "]", true);
  }
  for (int s = 0; s < n_staff; ++s) {
    if (static_cast<int>(service_mean[s].size()) != types) {
      throw InvalidConfig("service_mean[" + std::to_string(s) + "]", "needs one entry per inquiry type");
    }
    for (int t = 0; t < types; ++t) {
      require_positive(service_mean[s][t],
                       "service_mean[" + std::to_string(s) + "][" + std::to_string(t) + "]");
    }
  }
  require_positive(episode_length, "episode_length");
  if (max_queue_len < 1) throw InvalidConfig("max_queue_len", "must be at least 1");
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw InvalidConfig("discount", "must lie in [0, 1)");
  }
  if (!(vi_tolerance > 0.0)) throw InvalidConfig("vi_tolerance", "must be positive");
  if (vi_max_iter < 1) throw InvalidConfig("vi_max_iter", "must be at least 1");
}

int decision_state_count(const SimConfig& cfg) {
  const int side = cfg.max_queue_len + 1;
  return side * side * kMaxInquiryTypes;
}

int encode_state(const ObsState& obs, const SimConfig& cfg) {
  return encode_state(obs, cfg.max_queue_len);
}

int encode_state(const ObsState& obs, int m) {
  if (obs.n0 < 0 || obs.n0 > m || obs.n1 < 0 || obs.n1 > m) {
    throw InvalidState("queue length outside [0, " + std::to_string(m) + "]: (" +
                       std::to_string(obs.n0) + ", " + std::to_string(obs.n1) + ")");
  }
  const int tau = to_index(obs.tau);
  if (tau < 0 || tau >= kMaxInquiryTypes) throw InvalidState("inquiry type out of range");
  return (obs.n0 * (m + 1) + obs.n1) * kMaxInquiryTypes + tau;
}

ObsState decode_state(int index, const SimConfig& cfg) {
  if (index < 0 || index >= decision_state_count(cfg)) {
    throw InvalidState("state index out of range: " + std::to_string(index));
  }
  const int side = cfg.max_queue_len + 1;
  ObsState obs;
  obs.tau = static_cast<InquiryType>(index % kMaxInquiryTypes);
  const int cell = index / kMaxInquiryTypes;
  obs.n0 = cell / side;
  obs.n1 = cell % side;
  return obs;
}

double staff_mean_service(const SimConfig& cfg, StaffId staff) {
  if (staff.value < 0 || staff.value >= cfg.n_staff) {
    throw InvalidAction("staff id out of range: " + std::to_string(staff.value));
  }
  const auto& row = cfg.service_mean[staff.value];
  return std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
}

}  // namespace callroute
