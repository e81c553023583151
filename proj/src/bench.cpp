#include "signalbench/bench.hpp"

#include <climits>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "signalbench/runner.hpp"

namespace signalbench {

namespace {

// --set values and JSON scalars arrive as text; parse strictly so a typo is
// an error rather than a silently truncated number.
int parse_int(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (const std::exception&) {
    throw UsageError(key + ": expected an integer, got '" + text + "'");
  }
  if (pos != text.size() || v < INT_MIN || v > INT_MAX)
    throw UsageError(key + ": expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

double parse_real(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw UsageError(key + ": expected a number, got '" + text + "'");
  }
  if (pos != text.size()) throw UsageError(key + ": expected a number, got '" + text + "'");
  return v;
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw UsageError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  if (pos != text.size() || text.find('-') != std::string::npos)
    throw UsageError(key + ": expected a non-negative integer, got '" + text + "'");
  return v;
}

using Applier = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <typename Sub>
Applier set_int(Sub RunConfig::* sub, int Sub::* field) {
  return [sub, field](RunConfig& c, const std::string& k, const std::string& v) {
    c.*sub.*field = parse_int(k, v);
  };
}

template <typename Sub>
Applier set_real(Sub RunConfig::* sub, double Sub::* field) {
  return [sub, field](RunConfig& c, const std::string& k, const std::string& v) {
    c.*sub.*field = parse_real(k, v);
  };
}

// The ledger constants reachable from the config file and --set. gen.seed and
// gen.episode_length are absent on purpose: both are derived per run (from
// the eval/train seed and sim.episode_length).
const std::map<std::string, Applier>& override_table() {
  static const std::map<std::string, Applier> table = {
      {"sim.road_length", set_real(&RunConfig::sim, &SimConfig::road_length)},
      {"sim.free_speed", set_real(&RunConfig::sim, &SimConfig::free_speed)},
      {"sim.vehicle_space", set_real(&RunConfig::sim, &SimConfig::vehicle_space)},
      {"sim.saturation_headway", set_real(&RunConfig::sim, &SimConfig::saturation_headway)},
      {"sim.yellow_duration", set_int(&RunConfig::sim, &SimConfig::yellow_duration)},
      {"sim.step_duration", set_real(&RunConfig::sim, &SimConfig::step_duration)},
      {"sim.episode_length", set_int(&RunConfig::sim, &SimConfig::episode_length)},
      {"gen.n_vehicles", set_int(&RunConfig::gen, &GenConfig::n_vehicles)},
      {"gen.weibull_shape", set_real(&RunConfig::gen, &GenConfig::weibull_shape)},
      {"rr.green_quantum", set_int(&RunConfig::rr, &RrConfig::green_quantum)},
      {"rr.yellow_quantum", set_int(&RunConfig::rr, &RrConfig::yellow_quantum)},
      {"monopoly.min_time", set_int(&RunConfig::monopoly, &MonopolyConfig::min_time)},
      {"monopoly.max_time", set_int(&RunConfig::monopoly, &MonopolyConfig::max_time)},
      {"monopoly.time_step", set_int(&RunConfig::monopoly, &MonopolyConfig::time_step)},
      {"monopoly.yellow_quantum", set_int(&RunConfig::monopoly, &MonopolyConfig::yellow_quantum)},
      {"dqn.gamma", set_real(&RunConfig::dqn, &DqnConfig::gamma)},
      {"dqn.learning_rate", set_real(&RunConfig::dqn, &DqnConfig::learning_rate)},
      {"dqn.green_duration", set_int(&RunConfig::dqn, &DqnConfig::green_duration)},
      {"dqn.yellow_duration", set_int(&RunConfig::dqn, &DqnConfig::yellow_duration)},
      {"dqn.episodes", set_int(&RunConfig::dqn, &DqnConfig::episodes)},
      {"dqn.replay_samples_per_episode",
       set_int(&RunConfig::dqn, &DqnConfig::replay_samples_per_episode)},
      {"dqn.replay_capacity", set_int(&RunConfig::dqn, &DqnConfig::replay_capacity)},
      {"dqn.batch_size", set_int(&RunConfig::dqn, &DqnConfig::batch_size)},
      {"dqn.min_replay_before_training",
       set_int(&RunConfig::dqn, &DqnConfig::min_replay_before_training)},
      {"dqn.hidden_layers", set_int(&RunConfig::dqn, &DqnConfig::hidden_layers)},
      {"dqn.hidden_width", set_int(&RunConfig::dqn, &DqnConfig::hidden_width)},
      {"a2c.gamma", set_real(&RunConfig::a2c, &A2cConfig::gamma)},
      {"a2c.learning_rate", set_real(&RunConfig::a2c, &A2cConfig::learning_rate)},
      {"a2c.n_workers", set_int(&RunConfig::a2c, &A2cConfig::n_workers)},
      {"a2c.entropy_coefficient", set_real(&RunConfig::a2c, &A2cConfig::entropy_coefficient)},
      {"a2c.value_loss_coefficient",
       set_real(&RunConfig::a2c, &A2cConfig::value_loss_coefficient)},
      {"a2c.update_horizon", set_int(&RunConfig::a2c, &A2cConfig::update_horizon)},
      {"a2c.green_duration", set_int(&RunConfig::a2c, &A2cConfig::green_duration)},
      {"a2c.yellow_duration", set_int(&RunConfig::a2c, &A2cConfig::yellow_duration)},
      {"a2c.rounds", set_int(&RunConfig::a2c, &A2cConfig::rounds)},
      {"a2c.trunk_width", set_int(&RunConfig::a2c, &A2cConfig::trunk_width)},
      {"a2c.reward_scale", set_real(&RunConfig::a2c, &A2cConfig::reward_scale)},
  };
  return table;
}

std::string json_scalar_to_string(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw UsageError("config: " + key + " must be a scalar");
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto it = override_table().find(key);
  if (it == override_table().end()) throw UsageError("unknown override key '" + key + "'");
  it->second(cfg, key, value);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path.string() + ": expected a JSON object");

  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "mode" || key == "controller" || key == "scenario") {
      std::string text = value.is_number_integer()
                             ? std::to_string(value.get<long long>())
                             : json_scalar_to_string(key, value);
      if (key == "mode") cfg.mode = text;
      else if (key == "controller") cfg.controller = text;
      else cfg.scenario = text;
    } else if (key == "out" || key == "model") {
      if (!value.is_string()) throw UsageError("config: " + key + " must be a string");
      (key == "out" ? cfg.out_dir : cfg.model_path) = value.get<std::string>();
    } else if (key == "seeds") {
      if (!value.is_array()) throw UsageError("config: seeds must be an array");
      cfg.seeds.clear();
      for (const auto& s : value)
        cfg.seeds.push_back(parse_seed("seeds", json_scalar_to_string("seeds", s)));
    } else if (key == "workers") {
      if (!value.is_array()) throw UsageError("config: workers must be an array");
      cfg.workers_list.clear();
      for (const auto& w : value)
        cfg.workers_list.push_back(parse_int("workers", json_scalar_to_string("workers", w)));
    } else if (key == "episodes" || key == "rounds" || key == "n_workers") {
      int v = parse_int(key, json_scalar_to_string(key, value));
      if (key == "episodes") cfg.episodes = v;
      else if (key == "rounds") cfg.rounds = v;
      else cfg.n_workers = v;
    } else if (key.find('.') != std::string::npos) {
      apply_override(cfg, key, json_scalar_to_string(key, value));
    } else {
      throw UsageError("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

std::vector<Scenario> expand_scenarios(const std::string& scenario) {
  if (scenario == "all") return {Scenario::Scen1, Scenario::Scen2, Scenario::Scen3};
  if (scenario == "1") return {Scenario::Scen1};
  if (scenario == "2") return {Scenario::Scen2};
  if (scenario == "3") return {Scenario::Scen3};
  throw UsageError("scenario must be 1, 2, 3, or all (got '" + scenario + "')");
}

namespace {

std::unique_ptr<Controller> make_eval_controller(const RunConfig& cfg) {
  if (cfg.controller == "rr") return std::make_unique<RoundRobinController>(cfg.rr);
  if (cfg.controller == "monopoly") return std::make_unique<MonopolyController>(cfg.monopoly);
  if (cfg.controller == "dqn" || cfg.controller == "a2c") {
    if (cfg.model_path.empty())
      throw UsageError(cfg.controller + " eval needs a trained model (--model FILE)");
    if (!std::filesystem::exists(cfg.model_path))
      throw UsageError("model file not found: " + cfg.model_path.string());
    if (cfg.controller == "dqn")
      return std::make_unique<DqnController>(load_mlp(cfg.model_path), cfg.dqn);
    return std::make_unique<A2cController>(load_a2c(cfg.model_path), cfg.a2c);
  }
  throw UsageError("controller must be rr, monopoly, dqn, or a2c (got '" + cfg.controller + "')");
}

// Route spawn horizon always tracks the episode length; the route seed is the
// run's seed.
GenConfig gen_for_run(const RunConfig& cfg, std::uint64_t seed) {
  GenConfig gen = cfg.gen;
  gen.episode_length = cfg.sim.episode_length;
  gen.seed = seed;
  return gen;
}

// n_vehicles = 0 is a supported degenerate config (an empty road network);
// generate_routes itself insists on n > 0.
RoutePlan routes_for_run(const GenConfig& gen, Scenario scen) {
  if (gen.n_vehicles == 0) return {};
  return generate_routes(gen, scen);
}

void require_seeds(const RunConfig& cfg) {
  if (cfg.seeds.empty()) throw UsageError("at least one seed is required");
}

std::filesystem::path step_file_name(const RunConfig& cfg, Scenario scen, std::uint64_t seed) {
  std::ostringstream name;
  name << "steps_" << cfg.controller << "_scen" << static_cast<int>(scen) << "_seed" << seed
       << ".csv";
  return cfg.out_dir / name.str();
}

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<double>& rewards,
                     const std::vector<double>& waits, const std::vector<double>& wall_ms) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "episode,scenario,cum_reward,total_wait,wall_ms\n";
  for (std::size_t e = 0; e < rewards.size(); ++e) {
    out << e << ',' << (e % 3 + 1) << ',' << format_real(rewards[e]) << ','
        << format_real(waits[e]) << ',' << format_real(wall_ms[e]) << '\n';
  }
}

}  // namespace

EpisodeLog eval_episode(const RunConfig& cfg, Scenario scen, std::uint64_t seed) {
  std::unique_ptr<Controller> ctl = make_eval_controller(cfg);
  RoutePlan plan = routes_for_run(gen_for_run(cfg, seed), scen);
  return run_episode(cfg.sim, plan, *ctl, scen, seed);
}

EvalOutputs run_eval(const RunConfig& cfg) {
  require_seeds(cfg);
  std::vector<Scenario> scens = expand_scenarios(cfg.scenario);
  std::unique_ptr<Controller> ctl = make_eval_controller(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  EvalOutputs out;
  std::vector<EpisodeLog> logs;
  for (Scenario scen : scens) {
    for (std::uint64_t seed : cfg.seeds) {
      RoutePlan plan = routes_for_run(gen_for_run(cfg, seed), scen);
      EpisodeLog log = run_episode(cfg.sim, plan, *ctl, scen, seed);
      std::filesystem::path file = step_file_name(cfg, scen, seed);
      write_step_csv(file, log);
      out.step_files.push_back(file);
      logs.push_back(std::move(log));
    }
  }
  out.summary = summarize(logs);
  out.summary_file = cfg.out_dir / "summary.csv";
  write_summary_csv(out.summary_file, out.summary);
  return out;
}

TrainOutputs run_train(const RunConfig& cfg, std::ostream* progress) {
  require_seeds(cfg);
  std::uint64_t seed = cfg.seeds.front();
  GenConfig gen = gen_for_run(cfg, /*seed=*/0);  // trainers derive their own route seeds
  std::filesystem::create_directories(cfg.out_dir);
  TrainOutputs out;

  if (cfg.controller == "dqn") {
    DqnConfig dqn = cfg.dqn;
    if (cfg.episodes > 0) dqn.episodes = cfg.episodes;
    DqnTrainResult res = dqn_train(dqn, cfg.sim, gen, seed, progress);

    out.model_file = cfg.out_dir / "model_dqn.bin";
    save_mlp(out.model_file, res.qnet);
    out.curve_file = cfg.out_dir / "curve_dqn.csv";
    write_curve_csv(out.curve_file, res.episode_rewards, res.episode_waits, res.episode_wall_ms);
  } else if (cfg.controller == "a2c") {
    A2cConfig a2c = cfg.a2c;
    if (cfg.rounds > 0) a2c.rounds = cfg.rounds;
    if (cfg.n_workers > 0) a2c.n_workers = cfg.n_workers;
    A2cTrainResult res = a2c_train(a2c, cfg.sim, gen, seed, progress);

    out.model_file = cfg.out_dir / "model_a2c.bin";
    save_a2c(out.model_file, res.net);

    std::vector<double> rewards, waits;
    for (std::size_t r = 0; r < res.worker_rewards.size(); ++r) {
      rewards.push_back(mean(res.worker_rewards[r]));
      waits.push_back(mean(res.worker_waits[r]));
    }
    out.curve_file = cfg.out_dir / "curve_a2c.csv";
    write_curve_csv(out.curve_file, rewards, waits, res.round_wall_ms);

    // Workers run in lockstep (one episode per round each), so the per-worker
    // share of the measured throughput is uniform.
    out.throughput_file = cfg.out_dir / "throughput_a2c.csv";
    std::ofstream thr(out.throughput_file);
    if (!thr) throw std::runtime_error("cannot write " + out.throughput_file.string());
    thr << "worker,env_steps,steps_per_sec\n";
    double worker_steps = static_cast<double>(a2c.rounds) * cfg.sim.episode_length;
    for (int w = 0; w < a2c.n_workers; ++w) {
      thr << w << ',' << format_real(worker_steps) << ','
          << format_real(res.env_steps_per_second / a2c.n_workers) << '\n';
    }
  } else {
    throw UsageError("train mode needs controller dqn or a2c (got '" + cfg.controller + "')");
  }
  return out;
}

std::filesystem::path run_scaling(const RunConfig& cfg, std::ostream* progress) {
  require_seeds(cfg);
  if (cfg.workers_list.empty()) throw UsageError("scaling needs a non-empty workers list");
  for (int w : cfg.workers_list)
    if (w < 1) throw UsageError("worker counts must be >= 1");
  std::filesystem::create_directories(cfg.out_dir);

  std::filesystem::path file = cfg.out_dir / "scaling.csv";
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "n_workers,scenario,total_wait,train_wall_ms,steps_per_sec\n";

  for (int workers : cfg.workers_list) {
    A2cConfig a2c = cfg.a2c;
    a2c.n_workers = workers;
    if (cfg.rounds > 0) a2c.rounds = cfg.rounds;
    GenConfig gen = gen_for_run(cfg, /*seed=*/0);
    A2cTrainResult res = a2c_train(a2c, cfg.sim, gen, cfg.seeds.front(), progress);

    A2cController ctl(res.net, a2c);
    for (int s = 1; s <= 3; ++s) {
      Scenario scen = scenario_from_int(s);
      double wait = 0.0;
      for (std::uint64_t seed : cfg.seeds) {
        RoutePlan plan = routes_for_run(gen_for_run(cfg, seed), scen);
        EpisodeLog log = run_episode(cfg.sim, plan, ctl, scen, seed);
        wait += static_cast<double>(total_wait(log));
      }
      wait /= static_cast<double>(cfg.seeds.size());
      out << workers << ',' << s << ',' << format_real(wait) << ','
          << format_real(res.wall_seconds * 1000.0) << ','
          << format_real(res.env_steps_per_second) << '\n';
    }
  }
  return file;
}

}  // namespace signalbench
