// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "callroute/cli.hpp"
#include "callroute/des.hpp"
#include "callroute/env.hpp"
#include "callroute/eval.hpp"
#include "callroute/mdp.hpp"
#include "callroute/policy.hpp"
#include "callroute/ppo.hpp"
#include "callroute/value_iteration.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace callroute;

namespace {

constexpr std::uint64_t kSeed = 2024;
constexpr std::uint64_t kEvalSeed = 7;
constexpr int kCases = 10'000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* spec, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int rc = run_cli(args, out, err);
  if (rc != 0) std::cerr << "callroute " << args.front() << " failed: " << err.str();
  return rc;
}

double rng_in(RngStream& r, double lo, double hi) { return lo + (hi - lo) * r.uniform(); }

// Shared artifacts for criteria 3 and 5.
struct Trained {
  TrainResult result;
  double seconds = 0.0;
};

const Trained& trained() {
  static const Trained t = [] {
    Trained out;
    const auto t0 = std::chrono::steady_clock::now();
    out.result = train(SimConfig{}, PpoConfig{}, kSeed);
    out.seconds = seconds_since(t0);
    return out;
  }();
  return t;
}

Outcome random_baseline(const fs::path& work, bool throughput) {
  static json report;
  if (report.is_null()) {
    const fs::path dir = work / "random_eval";
    if (cli({"eval", "random", "-n", "1000", "--seed", std::to_string(kSeed), "--jobs", "2", "--out",
             dir.string()}) != 0) {
      return {false, "eval subcommand failed"};
    }
    report = json::parse(slurp(dir / "report.json"));
  }
  auto mean = [&](const char* metric) { return report["metrics"][metric]["mean"].get<double>(); };
  if (!throughput) {
    const double wait = mean("Client Waiting time");
    return {wait >= 101.0 && wait <= 152.0, "mean waiting time " + fmt("%.2f", wait) + " s (band [101, 152])"};
  }
  const double served = mean("Client Served");
  const double abandoned = mean("Client Abandonment");
  const bool ok = served >= 274.0 && served <= 370.0 && abandoned >= 166.0 && abandoned <= 248.0;
  return {ok, "served " + fmt("%.1f", served) + " (band [274, 370]), abandoned " +
                  fmt("%.1f", abandoned) + " (band [166, 248])"};
}

Outcome policy_ordering() {
  const SimConfig cfg;
  const MdpModel model = build_model(cfg, cfg.transition_model);
  const ViResult vi = value_iteration(model, cfg.discount, cfg.vi_tolerance, cfg.vi_max_iter);
  const TabularPolicy vi_policy(extract_policy(model, vi.values, cfg.discount), "vi");
  SoftmaxPolicy ppo = trained().result.policy;
  ppo.set_greedy(true);
  const RandomPolicy rnd;

  const auto r_ppo = evaluate(cfg, ppo, 1000, kEvalSeed, 2);
  const auto r_vi = evaluate(cfg, vi_policy, 1000, kEvalSeed, 2);
  const auto r_rnd = evaluate(cfg, rnd, 1000, kEvalSeed, 2);

  const auto d1 = paired_difference(r_ppo, r_vi, Metric::TotalReward);
  const auto d2 = paired_difference(r_vi, r_rnd, Metric::TotalReward);
  const bool reward_ok = d1.mean > d1.ci95 && d2.mean > d2.ci95;
  const bool aband_ok = r_ppo.abandoned.mean < r_vi.abandoned.mean && r_vi.abandoned.mean < r_rnd.abandoned.mean;
  const bool served_ok = r_ppo.served.mean > r_vi.served.mean && r_vi.served.mean > r_rnd.served.mean;

  std::string d = "reward ppo " + fmt("%.0f", r_ppo.total_reward.mean) + " / vi " +
                  fmt("%.0f", r_vi.total_reward.mean) + " / random " + fmt("%.0f", r_rnd.total_reward.mean) +
                  "; gaps " + fmt("%.0f", d1.mean) + "±" + fmt("%.0f", d1.ci95) + ", " + fmt("%.0f", d2.mean) +
                  "±" + fmt("%.0f", d2.ci95) + "; abandoned " + fmt("%.1f", r_ppo.abandoned.mean) + " / " +
                  fmt("%.1f", r_vi.abandoned.mean) + " / " + fmt("%.1f", r_rnd.abandoned.mean) + "; served " +
                  fmt("%.1f", r_ppo.served.mean) + " / " + fmt("%.1f", r_vi.served.mean) + " / " +
                  fmt("%.1f", r_rnd.served.mean);
  return {reward_ok && aband_ok && served_ok, d};
}

Outcome vi_convergence() {
  SimConfig cfg;
  cfg.discount = 0.99;
  const MdpModel model = build_model(cfg, TransitionModel::Embedded);
  const auto t0 = std::chrono::steady_clock::now();
  const ViResult r = value_iteration(model, cfg.discount, 1e-6, cfg.vi_max_iter);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  bool monotone = true;
  for (std::size_t k = 1; k < r.residual_history.size(); ++k) {
    const double prev = r.residual_history[k - 1];
    if (prev > 0.0) worst = std::max(worst, r.residual_history[k] / prev);
    // Rounding in the sup-norm can exceed the exact bound by a few ulps.
    if (r.residual_history[k] > cfg.discount * prev * (1.0 + 1e-9) + 1e-12) monotone = false;
  }
  const bool ok = r.residual < 1e-6 && monotone && secs < 1.0;
  return {ok, std::to_string(r.iterations) + " sweeps, " + fmt("%.3f", secs) + " s, max decay ratio " +
                  fmt("%.6f", worst) + " (gamma 0.99)"};
}

Outcome ppo_learning() {
  const auto& t = trained();
  const auto& curve = t.result.curve;
  const std::size_t n = curve.size();
  const std::size_t w = std::max<std::size_t>(1, n / 10);
  auto window_mean = [&](std::size_t end) {
    double s = 0.0;
    for (std::size_t i = end - w; i < end; ++i) s += curve[i].episode_reward;
    return s / static_cast<double>(w);
  };
  const double trailing = window_mean(n);
  double best = -INFINITY;
  for (std::size_t end = w; end <= n; ++end) best = std::max(best, window_mean(end));

  // Random baseline on the very episodes of the trailing window.
  const auto rnd = evaluate(SimConfig{}, RandomPolicy{}, static_cast<int>(w), kSeed, 2, n - w);
  const double base = rnd.total_reward.mean;
  const double improvement = (trailing - base) / std::abs(base);
  const bool a = improvement >= 0.15;
  const bool b = trailing >= best - 0.05 * std::abs(best);
  return {a && b && t.seconds < 1800.0,
          "(a) trailing " + fmt("%.0f", trailing) + " vs random " + fmt("%.0f", base) + " = " +
              fmt("%.2f", 100.0 * improvement) + "% better (need 15%)" + (a ? "" : " FAIL") +
              "; (b) best MA " + fmt("%.0f", best) + ", trailing/best " + fmt("%.4f", best / trailing) +
              (b ? "" : " FAIL") + "; " + std::to_string(n) + " episodes, " + fmt("%.1f", t.seconds) + " s"};
}

Outcome mm1_oracle() {
  SimConfig cfg;
  cfg.n_staff = 1;
  cfg.inter_arrival_mean = {100.0};
  cfg.service_mean = {{50.0}};
  cfg.abandonment_mean = {INFINITY};
  cfg.max_queue_len = 1000;
  cfg.master_seed = kSeed;
  const auto t0 = std::chrono::steady_clock::now();
  CallCentreEnv env(cfg);
  double wait = 0.0;
  std::int64_t served = 0, rejected = 0;
  for (std::uint64_t ep = 0; ep < 200; ++ep) {
    env.reset(ep);
    while (!env.done()) env.step(route_to(0));
    const auto m = env.finalize_metrics();
    wait += m.wait_sum;
    served += m.wait_count;
    rejected += m.rejected;
  }
  const double mean = wait / static_cast<double>(served);
  const double lambda = 1.0 / 100.0, mu = 1.0 / 50.0;
  const double oracle = lambda / (mu * (mu - lambda));
  const double secs = seconds_since(t0);
  const bool ok = std::abs(mean - oracle) <= 0.1 * oracle && rejected == 0 && secs < 30.0;
  return {ok, "mean delay " + fmt("%.2f", mean) + " s vs " + fmt("%.1f", oracle) + " s over " +
                  std::to_string(served) + " clients (" + fmt("%.1f", secs) + " s)"};
}

// Each property returns an empty string on success, else a description.
std::string prop_event_queue() {
  RngStream rng = derive_stream(kSeed, 100);
  for (int c = 0; c < kCases; ++c) {
    EventQueue q;
    double last = 0.0;
    for (int i = 0; i < 30; ++i) {
      if (q.empty() || rng.uniform() < 0.6) {
        q.schedule(Event::arrival(q.now() + std::floor(rng.uniform() * 4.0), InquiryType::Type0));
      } else if (q.pop_next()->time < last) {
        return "event queue popped out of order";
      } else {
        last = q.now();
      }
    }
  }
  return "";
}

std::string prop_conservation() {
  RngStream rng = derive_stream(kSeed, 101);
  for (int c = 0; c < kCases; ++c) {
    SimConfig cfg;
    cfg.episode_length = rng_in(rng, 100.0, 3000.0);
    cfg.max_queue_len = 1 + static_cast<int>(rng() % 14);
    for (auto& m : cfg.inter_arrival_mean) m = rng_in(rng, 10.0, 200.0);
    for (auto& m : cfg.abandonment_mean) m = rng.uniform() < 0.2 ? INFINITY : rng_in(rng, 20.0, 500.0);
    for (auto& row : cfg.service_mean) {
      for (auto& m : row) m = rng_in(rng, 10.0, 300.0);
    }
    cfg.master_seed = rng();
    CallCentreEnv env(cfg);
    RngStream prng = derive_stream(*cfg.master_seed, 1);
    env.reset(0);
    while (!env.done()) env.step(random_act(prng));
    const auto m = env.finalize_metrics();
    if (m.served + m.abandoned + m.rejected != m.arrivals) return "conservation violated";
  }
  return "";
}

std::string prop_normalization() {
  const MdpModel model = build_model(SimConfig{}, TransitionModel::Embedded);
  if (model.state_count() != 675) return "embedded model does not have 675 states";
  for (int s = 0; s < model.state_count(); ++s) {
    for (const auto& e : model.actions(s)) {
      double total = 0.0;
      for (const auto& t : e.transitions) total += t.prob;
      if (std::abs(total - 1.0) > 1e-12) return "state " + std::to_string(s) + " not normalized";
    }
  }
  return "";
}

std::string prop_bijection() {
  const SimConfig cfg;
  std::set<int> seen;
  for (int n0 = 0; n0 <= 14; ++n0) {
    for (int n1 = 0; n1 <= 14; ++n1) {
      for (int t = 0; t < 2; ++t) {
        const ObsState s{n0, n1, inquiry_from_index(t)};
        const int i = encode_state(s, cfg);
        if (i < 0 || i >= 450 || !(decode_state(i, cfg) == s)) return "encode/decode mismatch";
        seen.insert(i);
      }
    }
  }
  return seen.size() == 450 ? "" : "encoding not injective";
}

std::string prop_gae() {
  RngStream rng = derive_stream(kSeed, 102);
  for (int c = 0; c < kCases; ++c) {
    const int n = 1 + static_cast<int>(rng() % 40);
    const double gamma = rng_in(rng, 0.0, 0.999);
    std::vector<double> r(n), v(n);
    std::vector<std::uint8_t> d(n, 0);
    d[n - 1] = 1;
    for (int i = 0; i < n; ++i) {
      r[i] = rng_in(rng, -10.0, 10.0);
      v[i] = rng_in(rng, -10.0, 10.0);
    }
    const auto g = compute_gae(r, v, d, 0.0, gamma, 1.0);
    for (int t = 0; t < n; ++t) {
      double ret = 0.0, disc = 1.0;
      for (int k = t; k < n; ++k, disc *= gamma) ret += disc * r[k];
      if (std::abs(g.advantages[t] - (ret - v[t])) > 1e-9 * std::max(1.0, std::abs(ret))) {
        return "GAE telescoping mismatch";
      }
    }
  }
  return "";
}

std::string prop_softmax() {
  RngStream rng = derive_stream(kSeed, 103);
  for (int c = 0; c < kCases; ++c) {
    const ActionPair z{rng_in(rng, -50.0, 50.0), rng_in(rng, -50.0, 50.0)};
    const double k = rng_in(rng, -100.0, 100.0);
    const auto p = softmax_probs(z);
    const auto q = softmax_probs({z[0] + k, z[1] + k});
    if (std::abs(p[0] + p[1] - 1.0) > 1e-15) return "softmax not normalized";
    if (std::abs(p[0] - q[0]) > 1e-12) return "softmax not shift invariant";
  }
  return "";
}

std::string prop_gradient() {
  RngStream rng = derive_stream(kSeed, 104);
  PpoConfig cfg;
  double worst = 0.0;
  for (int c = 0; c < kCases; ++c) {
    cfg.clip_epsilon = rng_in(rng, 0.05, 0.4);
    cfg.entropy_coef = rng_in(rng, 0.0, 0.1);
    SoftmaxPolicy pol(1);
    for (auto& z : pol.logits()) z = {rng_in(rng, -3.0, 3.0), rng_in(rng, -3.0, 3.0)};
    RolloutBuffer buf;
    std::vector<double> adv;
    std::vector<std::size_t> batch;
    const int n = 1 + static_cast<int>(rng() % 24);
    for (int i = 0; i < n; ++i) {
      const int s = static_cast<int>(rng() % 8), a = static_cast<int>(rng() % 2);
      double rho;
      do {
        rho = rng_in(rng, 0.5, 1.5);
      } while (std::abs(std::abs(rho - 1.0) - cfg.clip_epsilon) < 1e-3);
      buf.push(s, a, 0.0, false, 0.0, pol.log_prob(s, a) - std::log(rho));
      adv.push_back(rng_in(rng, -2.0, 2.0));
      batch.push_back(static_cast<std::size_t>(i));
    }
    const auto g = surrogate_gradient(pol, buf, adv, batch, cfg);
    for (int s = 0; s < 8; ++s) {
      for (int j = 0; j < 2; ++j) {
        SoftmaxPolicy hi = pol, lo = pol;
        hi.logits()[s][j] += 1e-5;
        lo.logits()[s][j] -= 1e-5;
        const double fd = (surrogate_objective(hi, buf, adv, batch, cfg).objective -
                           surrogate_objective(lo, buf, adv, batch, cfg).objective) /
                          2e-5;
        const double rel = std::abs(g[s][j] - fd) / std::max({std::abs(g[s][j]), std::abs(fd), 1e-3});
        worst = std::max(worst, rel);
      }
    }
  }
  return worst <= 1e-6 ? "" : "gradient relative error " + fmt("%.3g", worst);
}

Outcome properties() {
  const std::vector<std::pair<const char*, std::function<std::string()>>> suites{
      {"event-queue monotonicity", prop_event_queue}, {"client conservation", prop_conservation},
      {"transition normalization", prop_normalization}, {"encode/decode bijection", prop_bijection},
      {"GAE telescoping", prop_gae}, {"softmax", prop_softmax}, {"policy gradient vs finite differences", prop_gradient}};
  std::string failures;
  for (const auto& [name, fn] : suites) {
    const std::string msg = fn();
    if (!msg.empty()) failures += std::string(failures.empty() ? "" : "; ") + name + ": " + msg;
  }
  return {failures.empty(), failures.empty() ? std::to_string(suites.size()) + " suites passed" : failures};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::set<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) names.insert(fs::relative(e.path(), a).string());
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) names.insert(fs::relative(e.path(), b).string());
  }
  if (names.empty()) {
    why = "no files written";
    return false;
  }
  for (const auto& n : names) {
    if (!fs::exists(a / n) || !fs::exists(b / n) || slurp(a / n) != slurp(b / n)) {
      why = n + " differs";
      return false;
    }
  }
  return true;
}

Outcome determinism(const fs::path& work) {
  const std::string seed = std::to_string(kSeed);
  const fs::path vi_policy = work / "det_solve_a" / "policy.json";
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"solve", {"solve"}},
      {"train", {"train", "--seed", seed, "--total-steps", "30000", "--checkpoint-every", "5"}},
      {"eval", {"eval", "random", vi_policy.string(), "-n", "50", "--seed", seed, "--jobs", "2"}},
      {"simulate", {"simulate", vi_policy.string(), "--seed", seed}},
  };
  std::string detail;
  bool ok = true;
  for (const auto& [name, args] : runs) {
    for (const char* tag : {"a", "b"}) {
      auto full = args;
      full.push_back("--out");
      full.push_back((work / ("det_" + name + "_" + tag)).string());
      if (cli(full) != 0) return {false, name + " failed to run"};
    }
    std::string why;
    const bool same = same_tree(work / ("det_" + name + "_a"), work / ("det_" + name + "_b"), why);
    ok = ok && same;
    detail += (detail.empty() ? "" : ", ") + name + (same ? " identical" : " (" + why + ")");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "callroute_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, [&] { return random_baseline(work, false); }},
      {2, [&] { return random_baseline(work, true); }},
      {3, policy_ordering},
      {4, vi_convergence},
      {5, ppo_learning},
      {6, mm1_oracle},
      {7, properties},
      {8, [&] { return determinism(work); }},
  };

  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << "CRITERION " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << " ["
              << fmt("%.1f", seconds_since(t0)) << " s]" << std::endl;
  }
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
