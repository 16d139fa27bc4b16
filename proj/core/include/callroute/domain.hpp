#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace callroute {

enum class InquiryType : std::uint8_t { Type0 = 0, Type1 = 1 };

inline constexpr int kMaxInquiryTypes = 2;

constexpr int to_index(InquiryType t) noexcept { return static_cast<int>(t); }
InquiryType inquiry_from_index(int i);

struct StaffId {
  int value = 0;
  friend constexpr auto operator<=>(StaffId, StaffId) = default;
};

// Route target for the client currently being routed.
struct Action {
  StaffId staff;
  friend constexpr auto operator<=>(Action, Action) = default;
};

constexpr Action route_to(int staff) noexcept { return Action{StaffId{staff}}; }

enum class TransitionModel : std::uint8_t { Embedded, Literal };

std::string to_string(TransitionModel m);
TransitionModel transition_model_from_string(const std::string& s);

// Call-centre parameters. Defaults reproduce the two-staff, two-type
// reference configuration. Means are in seconds; an abandonment mean of
// +infinity disables abandonment for that type.
struct SimConfig {
  std::vector<double> inter_arrival_mean{100.0, 120.0};
  std::vector<double> abandonment_mean{300.0, 400.0};
  // service_mean[staff][type]
  std::vector<std::vector<double>> service_mean{{120.0, 190.0}, {150.0, 170.0}};
  double episode_length = 28800.0;
  int max_queue_len = 14;
  int n_staff = 2;
  double discount = 0.8;
  double vi_tolerance = 1e-6;
  int vi_max_iter = 100000;
  TransitionModel transition_model = TransitionModel::Embedded;
  std::optional<std::uint64_t> master_seed;

  int n_types() const noexcept { return static_cast<int>(inter_arrival_mean.size()); }

  // Throws InvalidConfig naming the first offending field.
  void validate() const;
};

// Routing decision state: queue lengths (in-service client included) and
// the inquiry type of the client waiting to be routed. n1 is 0 for
// single-staff configurations.
struct ObsState {
  int n0 = 0;
  int n1 = 0;
  InquiryType tau = InquiryType::Type0;
  friend constexpr bool operator==(const ObsState&, const ObsState&) = default;
};

// Dense index over decision states, n0-major and tau-minor:
// (n0 * (max_queue_len + 1) + n1) * 2 + tau.
int decision_state_count(const SimConfig& cfg);
int encode_state(const ObsState& obs, const SimConfig& cfg);
int encode_state(const ObsState& obs, int max_queue_len);
ObsState decode_state(int index, const SimConfig& cfg);

inline constexpr const char* kStateIndexingTag = "n0-major,n1,tau-minor";

// Unweighted mean of a staff member's per-type service means.
double staff_mean_service(const SimConfig& cfg, StaffId staff);

struct EpisodeMetrics {
  double total_reward = 0.0;
  std::int64_t arrivals = 0;
  std::int64_t served = 0;
  std::int64_t abandoned = 0;
  std::int64_t rejected = 0;
  double wait_sum = 0.0;  // served clients only
  std::int64_t wait_count = 0;
  double abandoned_wait_sum = 0.0;
  std::vector<double> idle_seconds;  // per staff, clipped to the horizon

  double mean_wait() const noexcept {
    return wait_count > 0 ? wait_sum / static_cast<double>(wait_count) : 0.0;
  }
};

// Config files are JSON objects keyed by SimConfig field names; missing
// keys keep their defaults. A null abandonment mean means "disabled".
SimConfig config_from_json(const std::string& text);
SimConfig load_config(const std::string& path);
std::string config_to_json(const SimConfig& cfg);

}  // namespace callroute
