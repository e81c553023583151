#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifdef __unix__
#include <sys/wait.h>
#endif

#include "signalbench/bench.hpp"
#include "signalbench/runner.hpp"

using namespace signalbench;

namespace {

namespace fs = std::filesystem;

// A fresh scratch directory per call; wiped first so reruns stay clean.
fs::path scratch_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("sb_bench_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Small enough to run inside a unit test, big enough to queue traffic.
RunConfig toy_config() {
  RunConfig cfg;
  cfg.sim.episode_length = 500;
  cfg.gen.n_vehicles = 150;
  return cfg;
}

}  // namespace

TEST_CASE("apply_override reaches the nested ledger constants") {
  RunConfig cfg;
  apply_override(cfg, "sim.road_length", "300.5");
  apply_override(cfg, "sim.episode_length", "720");
  apply_override(cfg, "gen.n_vehicles", "42");
  apply_override(cfg, "rr.green_quantum", "20");
  apply_override(cfg, "monopoly.max_time", "45");
  apply_override(cfg, "dqn.gamma", "0.9");
  apply_override(cfg, "dqn.episodes", "7");
  apply_override(cfg, "a2c.entropy_coefficient", "0.05");
  apply_override(cfg, "a2c.n_workers", "3");

  CHECK(cfg.sim.road_length == 300.5);
  CHECK(cfg.sim.episode_length == 720);
  CHECK(cfg.gen.n_vehicles == 42);
  CHECK(cfg.rr.green_quantum == 20);
  CHECK(cfg.monopoly.max_time == 45);
  CHECK(cfg.dqn.gamma == 0.9);
  CHECK(cfg.dqn.episodes == 7);
  CHECK(cfg.a2c.entropy_coefficient == 0.05);
  CHECK(cfg.a2c.n_workers == 3);
}

TEST_CASE("apply_override rejects unknown keys and malformed values") {
  RunConfig cfg;
  CHECK_THROWS_AS(apply_override(cfg, "sim.gravity", "9.8"), UsageError);
  CHECK_THROWS_AS(apply_override(cfg, "gamma", "0.9"), UsageError);
  CHECK_THROWS_AS(apply_override(cfg, "dqn.episodes", "ten"), UsageError);
  CHECK_THROWS_AS(apply_override(cfg, "dqn.episodes", "7.5"), UsageError);
  CHECK_THROWS_AS(apply_override(cfg, "dqn.episodes", "12x"), UsageError);
  CHECK_THROWS_AS(apply_override(cfg, "sim.road_length", "long"), UsageError);
  CHECK(cfg.dqn.episodes == 100);  // failed overrides must not half-apply
}

TEST_CASE("load_config: plain keys, dotted keys, strict unknown-key errors") {
  fs::path dir = scratch_dir("config");
  fs::path good = dir / "good.json";
  std::ofstream(good) << R"({
    "mode": "train",
    "controller": "dqn",
    "scenario": 2,
    "seeds": [5, 6],
    "out": "results",
    "model": "m.bin",
    "episodes": 9,
    "rounds": 4,
    "n_workers": 2,
    "workers": [1, 2],
    "sim.episode_length": 300,
    "dqn.gamma": 0.5
  })";

  RunConfig cfg = load_config(good);
  CHECK(cfg.mode == "train");
  CHECK(cfg.controller == "dqn");
  CHECK(cfg.scenario == "2");
  CHECK(cfg.seeds == std::vector<std::uint64_t>{5, 6});
  CHECK(cfg.out_dir == fs::path("results"));
  CHECK(cfg.model_path == fs::path("m.bin"));
  CHECK(cfg.episodes == 9);
  CHECK(cfg.rounds == 4);
  CHECK(cfg.n_workers == 2);
  CHECK(cfg.workers_list == std::vector<int>{1, 2});
  CHECK(cfg.sim.episode_length == 300);
  CHECK(cfg.dqn.gamma == 0.5);

  fs::path unknown = dir / "unknown.json";
  std::ofstream(unknown) << R"({"controler": "rr"})";
  CHECK_THROWS_AS(load_config(unknown), UsageError);

  fs::path unknown_dotted = dir / "unknown_dotted.json";
  std::ofstream(unknown_dotted) << R"({"sim.lanes": 2})";
  CHECK_THROWS_AS(load_config(unknown_dotted), UsageError);

  fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK_THROWS_AS(load_config(broken), UsageError);

  fs::path not_object = dir / "not_object.json";
  std::ofstream(not_object) << "[1, 2]";
  CHECK_THROWS_AS(load_config(not_object), UsageError);

  CHECK_THROWS_AS(load_config(dir / "missing.json"), UsageError);
}

TEST_CASE("expand_scenarios") {
  CHECK(expand_scenarios("all") ==
        std::vector<Scenario>{Scenario::Scen1, Scenario::Scen2, Scenario::Scen3});
  CHECK(expand_scenarios("1") == std::vector<Scenario>{Scenario::Scen1});
  CHECK(expand_scenarios("3") == std::vector<Scenario>{Scenario::Scen3});
  CHECK_THROWS_AS(expand_scenarios("4"), UsageError);
  CHECK_THROWS_AS(expand_scenarios(""), UsageError);
}

TEST_CASE("run_eval: rr over all scenarios writes 3 step files and 3 summary rows") {
  RunConfig cfg = toy_config();
  cfg.scenario = "all";
  cfg.seeds = {42};
  cfg.out_dir = scratch_dir("eval_rr");

  EvalOutputs out = run_eval(cfg);
  REQUIRE(out.step_files.size() == 3);
  REQUIRE(out.summary.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(out.summary[i].controller == "rr");
    CHECK(out.summary[i].scenario == scenario_from_int(i + 1));
    CHECK(fs::exists(out.step_files[i]));
    EpisodeLog log = read_step_csv(out.step_files[i]);
    CHECK(log.records.size() == 500);
  }
  CHECK(out.step_files[0].filename() == fs::path("steps_rr_scen1_seed42.csv"));
  CHECK(fs::exists(out.summary_file));

  // mean across two seeds still yields one row per scenario
  cfg.seeds = {42, 43};
  cfg.out_dir = scratch_dir("eval_rr2");
  EvalOutputs two = run_eval(cfg);
  CHECK(two.step_files.size() == 6);
  CHECK(two.summary.size() == 3);
}

TEST_CASE("run_eval: identical config twice is byte-identical") {
  RunConfig cfg = toy_config();
  cfg.scenario = "2";
  cfg.seeds = {11, 12};

  cfg.out_dir = scratch_dir("eval_det_a");
  EvalOutputs a = run_eval(cfg);
  cfg.out_dir = scratch_dir("eval_det_b");
  EvalOutputs b = run_eval(cfg);

  REQUIRE(a.step_files.size() == b.step_files.size());
  for (std::size_t i = 0; i < a.step_files.size(); ++i)
    CHECK(slurp(a.step_files[i]) == slurp(b.step_files[i]));
  CHECK(slurp(a.summary_file) == slurp(b.summary_file));
}

TEST_CASE("run_eval: n_vehicles = 0 gives an all-zero total_queue column") {
  RunConfig cfg = toy_config();
  cfg.gen.n_vehicles = 0;
  cfg.scenario = "1";
  cfg.out_dir = scratch_dir("eval_empty");

  EvalOutputs out = run_eval(cfg);
  EpisodeLog log = read_step_csv(out.step_files.at(0));
  REQUIRE(log.records.size() == 500);
  for (const StepRecord& r : log.records) CHECK(r.total_queue == 0);
  CHECK(out.summary.at(0).peak_queue == 0.0);
  CHECK(out.summary.at(0).total_wait == 0.0);
}

TEST_CASE("run_eval usage errors: bad controller, missing model") {
  RunConfig cfg = toy_config();
  cfg.controller = "sarsa";
  CHECK_THROWS_AS(run_eval(cfg), UsageError);

  cfg.controller = "dqn";
  cfg.model_path.clear();
  CHECK_THROWS_AS(run_eval(cfg), UsageError);

  cfg.model_path = "/nonexistent/q.bin";
  CHECK_THROWS_AS(run_eval(cfg), UsageError);

  cfg.controller = "rr";
  cfg.seeds.clear();
  CHECK_THROWS_AS(run_eval(cfg), UsageError);
}

TEST_CASE("run_train dqn: curve rows, scenario cycle, loadable + reproducible model") {
  RunConfig cfg = toy_config();
  cfg.controller = "dqn";
  cfg.seeds = {7};
  cfg.episodes = 4;
  cfg.dqn.replay_samples_per_episode = 15;
  cfg.dqn.min_replay_before_training = 25;
  cfg.out_dir = scratch_dir("train_dqn_a");

  TrainOutputs out = run_train(cfg);
  REQUIRE(fs::exists(out.curve_file));
  REQUIRE(fs::exists(out.model_file));
  CHECK(out.throughput_file.empty());

  std::vector<std::string> lines = lines_of(slurp(out.curve_file));
  REQUIRE(lines.size() == 5);  // header + one row per episode
  CHECK(lines[0] == "episode,scenario,cum_reward,total_wait,wall_ms");
  for (int e = 0; e < 4; ++e) {
    std::string prefix = std::to_string(e) + "," + std::to_string(e % 3 + 1) + ",";
    CHECK(lines[1 + e].substr(0, prefix.size()) == prefix);
  }

  Mlp qnet = load_mlp(out.model_file);
  CHECK(qnet.input_size() == 36);
  CHECK(qnet.output_size() == 4);

  cfg.out_dir = scratch_dir("train_dqn_b");
  TrainOutputs again = run_train(cfg);
  CHECK(slurp(out.model_file) == slurp(again.model_file));
}

TEST_CASE("run_train a2c: curve, per-worker throughput, reproducible model") {
  RunConfig cfg = toy_config();
  cfg.controller = "a2c";
  cfg.seeds = {7};
  cfg.rounds = 3;
  cfg.n_workers = 2;
  cfg.out_dir = scratch_dir("train_a2c_a");

  TrainOutputs out = run_train(cfg);
  std::vector<std::string> curve = lines_of(slurp(out.curve_file));
  REQUIRE(curve.size() == 4);  // header + one row per round
  CHECK(curve[0] == "episode,scenario,cum_reward,total_wait,wall_ms");

  std::vector<std::string> thr = lines_of(slurp(out.throughput_file));
  REQUIRE(thr.size() == 3);  // header + one row per worker
  CHECK(thr[0] == "worker,env_steps,steps_per_sec");
  CHECK(thr[1].substr(0, 2) == "0,");
  CHECK(thr[2].substr(0, 2) == "1,");

  ActorCriticNet net = load_a2c(out.model_file);
  CHECK(net.trunk.input_size() == 36);

  cfg.out_dir = scratch_dir("train_a2c_b");
  TrainOutputs again = run_train(cfg);
  CHECK(slurp(out.model_file) == slurp(again.model_file));
}

TEST_CASE("run_train rejects non-learning controllers") {
  RunConfig cfg = toy_config();
  cfg.controller = "rr";
  CHECK_THROWS_AS(run_train(cfg), UsageError);
  cfg.controller = "monopoly";
  CHECK_THROWS_AS(run_train(cfg), UsageError);
}

TEST_CASE("run_scaling: one row per (worker count, scenario)") {
  RunConfig cfg = toy_config();
  cfg.seeds = {5};
  cfg.rounds = 2;
  cfg.workers_list = {1, 2};
  cfg.out_dir = scratch_dir("scaling");

  fs::path file = run_scaling(cfg);
  std::vector<std::string> lines = lines_of(slurp(file));
  REQUIRE(lines.size() == 7);  // header + 2 worker counts x 3 scenarios
  CHECK(lines[0] == "n_workers,scenario,total_wait,train_wall_ms,steps_per_sec");
  int row = 1;
  for (int w : {1, 2})
    for (int s = 1; s <= 3; ++s) {
      std::string prefix = std::to_string(w) + "," + std::to_string(s) + ",";
      CHECK(lines[row].substr(0, prefix.size()) == prefix);
      CHECK(std::count(lines[row].begin(), lines[row].end(), ',') == 4);
      ++row;
    }

  cfg.workers_list = {0};
  CHECK_THROWS_AS(run_scaling(cfg), UsageError);
  cfg.workers_list = {};
  CHECK_THROWS_AS(run_scaling(cfg), UsageError);
}

#if defined(SIGNALBENCH_CLI_PATH) && defined(__unix__)

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(SIGNALBENCH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes: 0 success, 1 usage") {
  fs::path dir = scratch_dir("cli");
  std::string small =
      " --set sim.episode_length=300 --set gen.n_vehicles=80 --out " + (dir / "run").string();

  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("eval --controller rr --scenario 1 --seed 3" + small) == 0);
  CHECK(run_cli("") == 1);                                       // missing subcommand
  CHECK(run_cli("evaluate") == 1);                               // unknown subcommand
  CHECK(run_cli("eval --controller rr --scenario 9" + small) == 1);
  CHECK(run_cli("eval --controller dqn --scenario 1" + small) == 1);  // no model
  CHECK(run_cli("train --controller rr" + small) == 1);
  CHECK(run_cli("eval --set nope=1" + small) == 1);
  CHECK(run_cli("eval --config /nonexistent.json" + small) == 1);
}

TEST_CASE("cli precedence: config file < flags < --set") {
  fs::path dir = scratch_dir("cli_prec");
  fs::path config = dir / "cfg.json";
  std::ofstream(config) << R"({
    "controller": "monopoly",
    "scenario": "3",
    "seeds": [9],
    "sim.episode_length": 300,
    "gen.n_vehicles": 80
  })";

  // flag overrides the file's scenario; --set overrides the file's episode length
  int rc = run_cli("eval --config " + config.string() + " --scenario 1 --set sim.episode_length=200 --out " +
                   (dir / "out").string());
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "out" / "steps_monopoly_scen1_seed9.csv"));
  EpisodeLog log = read_step_csv(dir / "out" / "steps_monopoly_scen1_seed9.csv");
  CHECK(log.records.size() == 200);
}

#endif  // SIGNALBENCH_CLI_PATH
