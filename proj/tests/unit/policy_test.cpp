#include <gtest/gtest.h>

#include <cmath>

#include "callroute/errors.hpp"
#include "callroute/policy.hpp"
#include "callroute/value_iteration.hpp"
#include "random_config.hpp"

namespace callroute {
namespace {

TEST(PolicyTest, RandomActionFrequenciesAreBalanced) {
  RngStream rng = derive_stream(1, 0);
  constexpr int kN = 1'000'000;
  int zeros = 0;
  for (int i = 0; i < kN; ++i) zeros += random_act(rng).staff.value == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / kN, 0.5, 0.01);
}

TEST(PolicyTest, RandomPolicyIsDeterministicAndIgnoresObservation) {
  RandomPolicy p;
  RngStream a(3), b(3);
  for (int i = 0; i < 1000; ++i) {
    const ObsState o1{i % 15, (i * 7) % 15, InquiryType::Type0};
    const ObsState o2{0, 0, InquiryType::Type1};
    ASSERT_EQ(p.act(o1, a), p.act(o2, b));
  }
  RngStream c(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(random_act(c, 1).staff.value, 0);
}

TEST(PolicyTest, SoftmaxExamples) {
  auto p = softmax_probs({0.0, 0.0});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  p = softmax_probs({std::log(3.0), 0.0});
  EXPECT_NEAR(p[0], 0.75, 1e-15);
  EXPECT_NEAR(p[1], 0.25, 1e-15);
  p = softmax_probs({1000.0, -1000.0});
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_THROW(softmax_probs({NAN, 0.0}), InvalidParameter);
  EXPECT_THROW(softmax_probs({INFINITY, 0.0}), InvalidParameter);
}

TEST(PolicyTest, PropertySoftmaxNormalizedAndShiftInvariant) {
  RngStream rng = derive_stream(44, 0);
  for (int c = 0; c < 10'000; ++c) {
    const ActionPair z{testing::uniform_in(rng, -50.0, 50.0), testing::uniform_in(rng, -50.0, 50.0)};
    const double shift = testing::uniform_in(rng, -100.0, 100.0);
    const auto p = softmax_probs(z);
    const auto q = softmax_probs({z[0] + shift, z[1] + shift});
    ASSERT_GE(p[0], 0.0);
    ASSERT_GE(p[1], 0.0);
    ASSERT_NEAR(p[0] + p[1], 1.0, 1e-15);
    ASSERT_NEAR(p[0], q[0], 1e-12);
    ASSERT_NEAR(p[1], q[1], 1e-12);
    // Oracle: logistic of the logit difference.
    ASSERT_NEAR(p[0], 1.0 / (1.0 + std::exp(z[1] - z[0])), 1e-12);
  }
}

TEST(PolicyTest, EntropyExamples) {
  const double half[] = {0.5, 0.5};
  const double certain[] = {1.0, 0.0};
  const double skew[] = {0.75, 0.25};
  EXPECT_NEAR(entropy(half), std::log(2.0), 1e-15);
  EXPECT_EQ(entropy(certain), 0.0);
  EXPECT_NEAR(entropy(skew), 0.5623351446188083, 1e-12);
}

TEST(PolicyTest, SoftmaxPolicySamplingAndGreedy) {
  SoftmaxPolicy p(14);
  EXPECT_EQ(p.state_count(), 450);
  p.logits()[7] = {std::log(3.0), 0.0};
  RngStream rng = derive_stream(9, 0);
  int zeros = 0;
  for (int i = 0; i < 200'000; ++i) zeros += p.sample(7, rng).staff.value == 0;
  EXPECT_NEAR(zeros / 200'000.0, 0.75, 0.005);
  EXPECT_NEAR(p.log_prob(7, 1), std::log(0.25), 1e-12);

  p.set_greedy(true);
  EXPECT_EQ(p.name(), "ppo-greedy");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(p.sample(7, rng).staff.value, 0);
  p.logits()[7] = {0.0, 0.0};
  EXPECT_EQ(p.sample(7, rng).staff.value, 0);

  const ObsState o = decode_state(7, SimConfig{});
  EXPECT_NEAR(*p.log_prob(o, route_to(0)), std::log(0.5), 1e-12);
  EXPECT_THROW(p.log_prob(o, route_to(2)), InvalidAction);
}

TEST(PolicyTest, TabularPolicyLooksUpState) {
  TabularPolicyTable t;
  t.max_queue_len = 14;
  t.actions.assign(450, route_to(0));
  t.actions[encode_state({3, 4, InquiryType::Type1}, 14)] = route_to(1);
  TabularPolicy p(t, "vi");
  RngStream rng(1);
  EXPECT_EQ(p.act({3, 4, InquiryType::Type1}, rng).staff.value, 1);
  EXPECT_EQ(p.act({3, 4, InquiryType::Type0}, rng).staff.value, 0);
  EXPECT_EQ(p.name(), "vi");

  t.actions.pop_back();
  EXPECT_THROW(TabularPolicy{t}, InvalidParameter);
}

TEST(PolicyTest, PolicyFileRoundTrip) {
  TabularPolicyTable t;
  t.max_queue_len = 14;
  for (int i = 0; i < 450; ++i) t.actions.push_back(route_to(i % 3 == 0 ? 1 : 0));
  auto back = policy_from_json(policy_to_json(t), "vi");
  auto* tp = dynamic_cast<TabularPolicy*>(back.get());
  ASSERT_NE(tp, nullptr);
  EXPECT_EQ(tp->table().actions, t.actions);

  SoftmaxPolicy sp(14);
  RngStream rng(2);
  for (auto& z : sp.logits()) z = {rng.uniform() * 4 - 2, rng.uniform() * 4 - 2};
  for (auto& v : sp.values()) v = rng.uniform() * 100;
  auto back2 = policy_from_json(policy_to_json(sp));
  auto* sp2 = dynamic_cast<SoftmaxPolicy*>(back2.get());
  ASSERT_NE(sp2, nullptr);
  EXPECT_EQ(sp2->logits(), sp.logits());
  EXPECT_EQ(sp2->values(), sp.values());
  EXPECT_EQ(policy_to_json(*sp2), policy_to_json(sp));
}

std::string schema_field(const std::string& text) {
  try {
    policy_from_json(text);
  } catch (const SchemaError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(PolicyTest, MalformedPolicyFilesNameTheField) {
  TabularPolicyTable t;
  t.max_queue_len = 1;
  t.actions.assign(8, route_to(0));
  const std::string good = policy_to_json(t);
  EXPECT_EQ(schema_field("[1,2]"), "<document>");
  EXPECT_EQ(schema_field("{"), "<document>");
  EXPECT_EQ(schema_field(R"({"indexing":"x"})"), "format");

  auto edit = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return s.replace(pos, from.size(), to);
  };
  EXPECT_EQ(schema_field(edit("\"state_count\":8", "\"state_count\":9")), "state_count");
  EXPECT_EQ(schema_field(edit("\"deterministic\"", "\"fuzzy\"")), "mode");
  EXPECT_EQ(schema_field(edit("n0-major", "tau-major")), "indexing");
  EXPECT_EQ(schema_field(edit("[0,0,0,0,0,0,0,0]", "[0,0,0,0,0,0,0,7]")), "actions[7]");
  EXPECT_EQ(schema_field(edit("[0,0,0,0,0,0,0,0]", "[0,0,0]")), "actions");
}

}  // namespace
}  // namespace callroute
