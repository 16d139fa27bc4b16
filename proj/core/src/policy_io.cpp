#include <fstream>
#include <sstream>

#include <json.hpp>

#include "callroute/errors.hpp"
#include "callroute/policy.hpp"

namespace callroute {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "callroute-policy/1";

json header(int max_queue_len, std::size_t states, const char* mode) {
  json doc;
  doc["format"] = kFormat;
  doc["indexing"] = kStateIndexingTag;
  doc["max_queue_len"] = max_queue_len;
  doc["state_count"] = states;
  doc["mode"] = mode;
  return doc;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text << '\n';
}

const json& require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw SchemaError(key, "missing");
  return *it;
}

}  // namespace

std::string policy_to_json(const TabularPolicyTable& table) {
  json doc = header(table.max_queue_len, table.actions.size(), "deterministic");
  json actions = json::array();
  for (const auto& a : table.actions) actions.push_back(a.staff.value);
  doc["actions"] = std::move(actions);
  return doc.dump();
}

std::string policy_to_json(const SoftmaxPolicy& policy) {
  json doc = header(policy.max_queue_len(), policy.logits().size(), "logits");
  json logits = json::array();
  for (const auto& z : policy.logits()) logits.push_back({z[0], z[1]});
  doc["logits"] = std::move(logits);
  doc["values"] = policy.values();
  return doc.dump();
}

void write_policy_file(const std::string& path, const TabularPolicyTable& table) {
  write_text(path, policy_to_json(table));
}

void write_policy_file(const std::string& path, const SoftmaxPolicy& policy) {
  write_text(path, policy_to_json(policy));
}

std::unique_ptr<Policy> policy_from_json(const std::string& text, const std::string& name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("<document>", e.what());
  }
  if (!doc.is_object()) throw SchemaError("<document>", "expected a JSON object");

  const json& format = require(doc, "format");
  if (!format.is_string() || format.get<std::string>() != kFormat) {
    throw SchemaError("format", std::string("expected \"") + kFormat + "\"");
  }
  const json& indexing = require(doc, "indexing");
  if (!indexing.is_string() || indexing.get<std::string>() != kStateIndexingTag) {
    throw SchemaError("indexing", std::string("expected \"") + kStateIndexingTag + "\"");
  }
  const json& mql = require(doc, "max_queue_len");
  if (!mql.is_number_integer() || mql.get<int>() < 1) {
    throw SchemaError("max_queue_len", "expected a positive integer");
  }
  const int max_queue_len = mql.get<int>();
  const std::size_t expected =
      static_cast<std::size_t>((max_queue_len + 1) * (max_queue_len + 1) * kMaxInquiryTypes);
  const json& count = require(doc, "state_count");
  if (!count.is_number_integer() || count.get<std::size_t>() != expected) {
    throw SchemaError("state_count", "expected " + std::to_string(expected));
  }
  const json& mode = require(doc, "mode");
  if (!mode.is_string()) throw SchemaError("mode", "expected a string");

  if (mode.get<std::string>() == "deterministic") {
    const json& actions = require(doc, "actions");
    if (!actions.is_array() || actions.size() != expected) {
      throw SchemaError("actions", "expected an array of " + std::to_string(expected) + " entries");
    }
    TabularPolicyTable table;
    table.max_queue_len = max_queue_len;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const json& a = actions[i];
      if (!a.is_number_integer() || a.get<int>() < 0 || a.get<int>() > 1) {
        throw SchemaError("actions[" + std::to_string(i) + "]", "expected 0 or 1");
      }
      table.actions.push_back(route_to(a.get<int>()));
    }
    return std::make_unique<TabularPolicy>(std::move(table), name.empty() ? "tabular" : name);
  }
  if (mode.get<std::string>() == "logits") {
    const json& logits = require(doc, "logits");
    if (!logits.is_array() || logits.size() != expected) {
      throw SchemaError("logits", "expected an array of " + std::to_string(expected) + " pairs");
    }
    auto policy = std::make_unique<SoftmaxPolicy>(max_queue_len);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const json& z = logits[i];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
        throw SchemaError("logits[" + std::to_string(i) + "]", "expected a pair of numbers");
      }
      policy->logits()[i] = {z[0].get<double>(), z[1].get<double>()};
    }
    if (auto v = doc.find("values"); v != doc.end()) {
      if (!v->is_array() || v->size() != expected) {
        throw SchemaError("values", "expected an array of " + std::to_string(expected) + " numbers");
      }
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw SchemaError("values[" + std::to_string(i) + "]", "expected a number");
        policy->values()[i] = (*v)[i].get<double>();
      }
    }
    return policy;
  }
  throw SchemaError("mode", "expected \"deterministic\" or \"logits\"");
}

std::unique_ptr<Policy> load_policy_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("<file>", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return policy_from_json(ss.str());
}

}  // namespace callroute
