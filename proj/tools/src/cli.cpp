#include "callroute/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "callroute/domain.hpp"
#include "callroute/env.hpp"
#include "callroute/errors.hpp"
#include "callroute/eval.hpp"
#include "callroute/mdp.hpp"
#include "callroute/policy.hpp"
#include "callroute/ppo.hpp"
#include "callroute/random.hpp"
#include "callroute/value_iteration.hpp"

namespace callroute {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("--config", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimConfig load_sim(const CommonOptions& o) {
  return o.config_path.empty() ? SimConfig{} : config_from_json(read_text(o.config_path));
}

std::uint64_t resolve_seed(const CommonOptions& o, const SimConfig& cfg, std::ostream& out) {
  if (o.seed) return *o.seed;
  if (cfg.master_seed) return *cfg.master_seed;
  const std::uint64_t s = entropy_seed();
  out << "seed: " << s << "\n";
  return s;
}

fs::path prepare_out(const CommonOptions& o) {
  fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidConfig("--out", "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

// Optional "ppo" object inside the config file, keyed by PpoConfig fields.
PpoConfig ppo_from_config(const std::string& config_path) {
  PpoConfig p;
  if (config_path.empty()) return p;
  const json doc = json::parse(read_text(config_path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return p;
  auto it = doc.find("ppo");
  if (it == doc.end()) return p;
  if (!it->is_object()) throw InvalidConfig("ppo", "expected an object");
  const json& j = *it;
  auto take = [&](const char* key, auto& field) {
    if (auto f = j.find(key); f != j.end()) {
      try {
        field = f->get<std::decay_t<decltype(field)>>();
      } catch (const json::exception& e) {
        throw InvalidConfig(std::string("ppo.") + key, e.what());
      }
    }
  };
  take("gamma", p.gamma);
  take("gae_lambda", p.gae_lambda);
  take("clip_epsilon", p.clip_epsilon);
  take("epochs_per_update", p.epochs_per_update);
  take("minibatch_size", p.minibatch_size);
  take("rollout_length", p.rollout_length);
  take("learning_rate", p.learning_rate);
  take("entropy_coef", p.entropy_coef);
  take("value_coef", p.value_coef);
  take("reward_scale", p.reward_scale);
  take("total_steps", p.total_steps);
  take("checkpoint_every", p.checkpoint_every);
  take("anneal_lr", p.anneal_lr);
  if (auto f = j.find("optimizer"); f != j.end()) {
    const std::string name = f->is_string() ? f->get<std::string>() : "";
    if (name == "sgd") {
      p.optimizer = OptimizerKind::Sgd;
    } else if (name == "adam") {
      p.optimizer = OptimizerKind::Adam;
    } else {
      throw InvalidConfig("ppo.optimizer", "expected \"sgd\" or \"adam\"");
    }
  }
  return p;
}

struct LoadedPolicy {
  std::string label;
  std::unique_ptr<Policy> policy;
};

LoadedPolicy load_policy_spec(const std::string& spec, const SimConfig& cfg, bool greedy) {
  if (spec == "random") return {"random", std::make_unique<RandomPolicy>(cfg.n_staff)};
  std::ifstream in(spec, std::ios::binary);
  if (!in) throw SchemaError("<file>", "cannot open policy file " + spec);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string label = fs::path(spec).stem().string();
  auto policy = policy_from_json(ss.str(), label);
  if (auto* sm = dynamic_cast<SoftmaxPolicy*>(policy.get())) {
    sm->set_greedy(greedy);
    if (sm->max_queue_len() != cfg.max_queue_len) {
      throw SchemaError("max_queue_len", "policy file does not match the config's max_queue_len");
    }
  } else if (auto* tp = dynamic_cast<TabularPolicy*>(policy.get())) {
    if (tp->table().max_queue_len != cfg.max_queue_len) {
      throw SchemaError("max_queue_len", "policy file does not match the config's max_queue_len");
    }
  }
  return {label, std::move(policy)};
}

int run_solve(const CommonOptions& o, const std::optional<std::string>& model_name,
              std::ostream& out) {
  SimConfig cfg = load_sim(o);
  if (model_name) cfg.transition_model = transition_model_from_string(*model_name);
  const fs::path dir = prepare_out(o);

  const auto t0 = std::chrono::steady_clock::now();
  const MdpModel model = build_model(cfg, cfg.transition_model);
  const ViResult vi = value_iteration(model, cfg.discount, cfg.vi_tolerance, cfg.vi_max_iter);
  const TabularPolicyTable table = extract_policy(model, vi.values, cfg.discount);
  const double wall = seconds_since(t0);

  write_policy_file((dir / "policy.json").string(), table);
  json summary;
  summary["transition_model"] = to_string(cfg.transition_model);
  summary["model_states"] = model.state_count();
  summary["policy_states"] = table.actions.size();
  summary["discount"] = cfg.discount;
  summary["tolerance"] = cfg.vi_tolerance;
  summary["iterations"] = vi.iterations;
  summary["residual"] = vi.residual;
  write_text(dir / "solve_summary.json", summary.dump(2) + "\n");

  out << "converged in " << vi.iterations << " iterations (residual " << fmt("%.3g", vi.residual)
      << ", " << fmt("%.3f", wall) << " s)\n";
  return kExitOk;
}

int run_train(const CommonOptions& o, std::optional<std::int64_t> total_steps,
              std::optional<int> checkpoint_every, std::ostream& out) {
  const SimConfig cfg = load_sim(o);
  PpoConfig ppo = ppo_from_config(o.config_path);
  if (total_steps) ppo.total_steps = *total_steps;
  if (checkpoint_every) ppo.checkpoint_every = *checkpoint_every;
  ppo.validate();
  const std::uint64_t seed = resolve_seed(o, cfg, out);
  const fs::path dir = prepare_out(o);
  const fs::path ckpt_dir = dir / "checkpoints";
  if (ppo.checkpoint_every > 0) fs::create_directories(ckpt_dir);

  UpdateStats last{};
  TrainHooks hooks;
  hooks.on_update = [&](int, std::int64_t, const UpdateStats& s) { last = s; };
  hooks.on_checkpoint = [&](int update, const SoftmaxPolicy& p) {
    char name[64];
    std::snprintf(name, sizeof name, "policy_%06d.json", update);
    write_policy_file((ckpt_dir / name).string(), p);
  };

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result;
  try {
    result = train(cfg, ppo, seed, hooks);
  } catch (const TrainingDiverged&) {
    out << "last update: entropy " << fmt("%.6g", last.entropy) << ", value loss "
        << fmt("%.6g", last.value_loss) << ", approx kl " << fmt("%.6g", last.approx_kl) << "\n";
    throw;
  }
  const double wall = seconds_since(t0);

  write_policy_file((dir / "policy.json").string(), result.policy);
  std::string curve = "steps,episode_reward\n";
  for (const auto& row : result.curve) {
    curve += std::to_string(row.steps) + "," + fmt("%.6f", row.episode_reward) + "\n";
  }
  write_text(dir / "curve.csv", curve);

  json summary;
  summary["seed"] = seed;
  summary["total_steps"] = ppo.total_steps;
  summary["updates"] = result.updates;
  summary["episodes"] = result.curve.size();
  summary["final_entropy"] = last.entropy;
  summary["final_value_loss"] = last.value_loss;
  summary["final_approx_kl"] = last.approx_kl;
  write_text(dir / "train_summary.json", summary.dump(2) + "\n");

  out << "trained " << result.updates << " updates, " << result.curve.size() << " episodes ("
      << fmt("%.1f", wall) << " s)\n";
  return kExitOk;
}

int run_eval(const CommonOptions& o, const std::vector<std::string>& specs, int episodes,
             bool greedy, std::ostream& out) {
  const SimConfig cfg = load_sim(o);
  std::vector<LoadedPolicy> policies;
  for (const auto& spec : specs) policies.push_back(load_policy_spec(spec, cfg, greedy));
  std::map<std::string, int> label_count;
  for (const auto& lp : policies) ++label_count[lp.label];
  for (std::size_t i = 0; i < policies.size(); ++i) {
    if (specs[i] != "random" && label_count[policies[i].label] > 1) {
      const fs::path p(specs[i]);
      policies[i].label = p.parent_path().filename().string() + "/" + p.stem().string();
    }
  }
  const std::uint64_t seed = resolve_seed(o, cfg, out);
  const fs::path dir = prepare_out(o);

  std::vector<AggregateReport> reports;
  for (const auto& lp : policies) {
    AggregateReport r = evaluate(cfg, *lp.policy, episodes, seed, o.jobs);
    r.policy_name = lp.label;
    reports.push_back(std::move(r));
  }

  const bool multi = reports.size() > 1;
  std::string json_text;
  std::string csv_text;
  std::string episodes_text;
  if (multi) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(json::parse(report_to_json(r)));
    json_text = arr.dump(2) + "\n";
  } else {
    json_text = report_to_json(reports.front());
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::string csv = report_to_csv(reports[i]);
    std::string eps = episodes_to_csv(reports[i]);
    if (i > 0) {
      csv.erase(0, csv.find('\n') + 1);
      eps.erase(0, eps.find('\n') + 1);
    }
    csv_text += csv;
    episodes_text += eps;
  }
  write_text(dir / "report.json", json_text);
  write_text(dir / "report.csv", csv_text);
  write_text(dir / "episodes.csv", episodes_text);

  if (multi) {
    const std::string table = render_comparison(compare(reports));
    write_text(dir / "comparison.txt", table);
    out << table;
  } else {
    const auto& r = reports.front();
    out << r.policy_name << ": " << r.episodes << " episodes, mean reward "
        << fmt("%.1f", r.total_reward.mean) << ", mean wait " << fmt("%.2f", r.waiting_time.mean)
        << " s\n";
  }
  return kExitOk;
}

int run_simulate(const CommonOptions& o, const std::string& spec, std::uint64_t episode,
                 bool greedy, std::ostream& out) {
  SimConfig cfg = load_sim(o);
  const LoadedPolicy lp = load_policy_spec(spec, cfg, greedy);
  const std::uint64_t seed = resolve_seed(o, cfg, out);
  cfg.master_seed = seed;
  const fs::path dir = prepare_out(o);

  CallCentreEnv env(cfg);
  env.set_trace(true);
  RngStream policy_rng = eval_policy_stream(seed, episode);
  ObsState obs = env.reset(episode);
  while (!env.done()) obs = env.step(lp.policy->act(obs, policy_rng)).obs;
  const EpisodeMetrics m = env.finalize_metrics();

  std::ofstream trace(dir / "trace.csv", std::ios::binary);
  if (!trace) throw Error("cannot write " + (dir / "trace.csv").string());
  write_trace_csv(trace, env.engine());
  write_text(dir / "metrics.csv", metrics_csv_header(cfg.n_staff) + "\n" + metrics_csv_row(m) + "\n");

  out << "simulated episode " << episode << ": " << m.arrivals << " arrivals, reward "
      << fmt("%.1f", m.total_reward) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Call-centre routing: simulation, value iteration, PPO and evaluation", "callroute"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", common.config_path, "JSON config file");
    sub->add_option("--out", common.out_dir, "Output directory")->capture_default_str();
    if (with_seed) sub->add_option("--seed", common.seed, "Master seed (u64)");
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "Solve the theoretical MDP by value iteration");
  add_common(solve, false);
  std::optional<std::string> model_name;
  solve->add_option("--transition-model", model_name, "embedded or literal")
      ->check(CLI::IsMember({"embedded", "literal"}));

  auto* trn = app.add_subcommand("train", "Train a tabular softmax policy with PPO");
  add_common(trn, true);
  std::optional<std::int64_t> total_steps;
  std::optional<int> checkpoint_every;
  trn->add_option("--total-steps", total_steps, "Environment steps")->check(CLI::PositiveNumber);
  trn->add_option("--checkpoint-every", checkpoint_every, "Updates between checkpoints (0 = off)")
      ->check(CLI::NonNegativeNumber);

  auto* ev = app.add_subcommand("eval", "Evaluate one or more policies on common random numbers");
  add_common(ev, true);
  std::vector<std::string> specs;
  int episodes = 1000;
  bool greedy = false;
  ev->add_option("policies", specs, "'random' or policy file paths")->required();
  ev->add_option("-n,--episodes", episodes, "Episodes per policy")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ev->add_flag("--greedy", greedy, "Act greedily with stochastic (logits) policies");

  auto* sim = app.add_subcommand("simulate", "Run one traced episode");
  add_common(sim, true);
  std::string sim_spec = "random";
  std::uint64_t episode = 0;
  sim->add_option("policy", sim_spec, "'random' or a policy file path")->capture_default_str();
  sim->add_option("--episode", episode, "Episode stream index")->capture_default_str();
  sim->add_flag("--greedy", greedy, "Act greedily with stochastic (logits) policies");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'callroute --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return run_solve(common, model_name, out);
    if (trn->parsed()) return run_train(common, total_steps, checkpoint_every, out);
    if (ev->parsed()) return run_eval(common, specs, episodes, greedy, out);
    return run_simulate(common, sim_spec, episode, greedy, out);
  } catch (const InvalidConfig& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "policy file error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    err << "invalid parameter: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NonConvergence& e) {
    err << "value iteration did not converge: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const TrainingDiverged& e) {
    err << "training diverged: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace callroute
