#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "callroute/domain.hpp"
#include "callroute/errors.hpp"

namespace callroute {

using nlohmann::json;

namespace {

double mean_or_disabled(const json& v, const std::string& field) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw InvalidConfig(field, "expected a number or null");
  return v.get<double>();
}

template <typename T>
T get_as(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw InvalidConfig(key, e.what());
  }
}

std::vector<double> number_list(const json& v, const std::string& field) {
  if (!v.is_array()) throw InvalidConfig(field, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto name = field + "[" + std::to_string(i) + "]";
    if (!v[i].is_number()) throw InvalidConfig(name, "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

}  // namespace

SimConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidConfig("<document>", e.what());
  }
  if (!doc.is_object()) throw InvalidConfig("<document>", "expected a JSON object");

  SimConfig cfg;
  if (auto it = doc.find("inter_arrival_mean"); it != doc.end()) {
    cfg.inter_arrival_mean = number_list(*it, "inter_arrival_mean");
  }
  if (auto it = doc.find("abandonment_mean"); it != doc.end()) {
    if (!it->is_array()) throw InvalidConfig("abandonment_mean", "expected an array");
    cfg.abandonment_mean.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      cfg.abandonment_mean.push_back(
          mean_or_disabled((*it)[i], "abandonment_mean[" + std::to_string(i) + "]"));
    }
  }
  if (auto it = doc.find("service_mean"); it != doc.end()) {
    if (!it->is_array()) throw InvalidConfig("service_mean", "expected an array of arrays");
    cfg.service_mean.clear();
    for (std::size_t s = 0; s < it->size(); ++s) {
      cfg.service_mean.push_back(number_list((*it)[s], "service_mean[" + std::to_string(s) + "]"));
    }
  }
  cfg.episode_length = get_as(doc, "episode_length", cfg.episode_length);
  cfg.max_queue_len = get_as(doc, "max_queue_len", cfg.max_queue_len);
  // n_staff defaults to the number of service rows when only those are given.
  cfg.n_staff = get_as(doc, "n_staff", static_cast<int>(cfg.service_mean.size()));
  cfg.discount = get_as(doc, "discount", cfg.discount);
  cfg.vi_tolerance = get_as(doc, "vi_tolerance", cfg.vi_tolerance);
  cfg.vi_max_iter = get_as(doc, "vi_max_iter", cfg.vi_max_iter);
  if (auto it = doc.find("transition_model"); it != doc.end()) {
    if (!it->is_string()) throw InvalidConfig("transition_model", "expected a string");
    cfg.transition_model = transition_model_from_string(it->get<std::string>());
  }
  if (auto it = doc.find("master_seed"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw InvalidConfig("master_seed", "expected an integer");
    cfg.master_seed = it->get<std::uint64_t>();
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("<file>", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const SimConfig& cfg) {
  json doc;
  doc["inter_arrival_mean"] = cfg.inter_arrival_mean;
  json aband = json::array();
  for (double m : cfg.abandonment_mean) {
    aband.push_back(std::isinf(m) ? json(nullptr) : json(m));
  }
  doc["abandonment_mean"] = aband;
  doc["service_mean"] = cfg.service_mean;
  doc["episode_length"] = cfg.episode_length;
  doc["max_queue_len"] = cfg.max_queue_len;
  doc["n_staff"] = cfg.n_staff;
  doc["discount"] = cfg.discount;
  doc["vi_tolerance"] = cfg.vi_tolerance;
  doc["vi_max_iter"] = cfg.vi_max_iter;
  doc["transition_model"] = to_string(cfg.transition_model);
  doc["master_seed"] = cfg.master_seed ? json(*cfg.master_seed) : json(nullptr);
  return doc.dump(2);
}

}  // namespace callroute
