#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "signalbench/controllers.hpp"
#include "signalbench/metrics.hpp"

namespace signalbench {

// Bad flags, unknown config keys, invalid mode/controller combinations. The
// CLI maps these to exit status 1; everything else that throws is a runtime
// failure and exits 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string mode = "eval";      // eval | train | scaling
  std::string controller = "rr";  // rr | monopoly | dqn | a2c
  std::string scenario = "all";   // "1" | "2" | "3" | "all"
  std::vector<std::uint64_t> seeds{42};
  std::filesystem::path out_dir = "out";
  std::filesystem::path model_path;        // trained model, dqn/a2c eval only
  int episodes = -1;                       // dqn train; -1 = keep dqn.episodes
  int rounds = -1;                         // a2c train; -1 = keep a2c.rounds
  int n_workers = -1;                      // a2c train; -1 = keep a2c.n_workers
  std::vector<int> workers_list{1, 2, 4};  // scaling mode grid

  SimConfig sim;
  GenConfig gen;  // episode_length and seed are filled in per run
  RrConfig rr;
  MonopolyConfig monopoly;
  DqnConfig dqn;
  A2cConfig a2c;
};

// Flat JSON object: plain keys mirror the RunConfig fields (mode, controller,
// scenario, seeds, out, model, episodes, rounds, n_workers, workers); dotted
// keys reach the nested ledger constants ("sim.road_length": 300). Unknown
// keys are errors, never silently ignored.
RunConfig load_config(const std::filesystem::path& path);

// One `--set key=value` override; accepts the same dotted keys as the config
// file. Throws UsageError for unknown keys or unparsable values.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

// "1" | "2" | "3" | "all" -> the scenarios to run.
std::vector<Scenario> expand_scenarios(const std::string& scenario);

struct EvalOutputs {
  std::vector<std::filesystem::path> step_files;  // one per scenario x seed
  std::filesystem::path summary_file;
  std::vector<SummaryRow> summary;  // means across seeds per scenario
};

// One in-memory episode under cfg's controller (dqn/a2c load cfg.model_path);
// routes are seeded by `seed`. No files are touched.
EpisodeLog eval_episode(const RunConfig& cfg, Scenario scen, std::uint64_t seed);

// For every scenario x seed: build routes (seeded by the eval seed), run one
// full episode under the controller, write the step CSV; finish with the
// grouped summary. dqn/a2c require a trained model file.
EvalOutputs run_eval(const RunConfig& cfg);

struct TrainOutputs {
  std::filesystem::path curve_file;
  std::filesystem::path model_file;
  std::filesystem::path throughput_file;  // a2c only, empty otherwise
};

// Trains dqn or a2c on seeds[0], scenarios cycling 1,2,3. Writes the model
// file and the learning curve `episode,scenario,cum_reward,total_wait,wall_ms`
// (for a2c one row per round, averaged across workers, plus a per-worker
// throughput report).
TrainOutputs run_train(const RunConfig& cfg, std::ostream* progress = nullptr);

// Trains one a2c model per entry of workers_list on the same base seed, then
// evaluates each on all three scenarios (total_wait averaged over the eval
// seeds). Writes `n_workers,scenario,total_wait,train_wall_ms,steps_per_sec`
// and returns the file path.
std::filesystem::path run_scaling(const RunConfig& cfg, std::ostream* progress = nullptr);

}  // namespace signalbench
