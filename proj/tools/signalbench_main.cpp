#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "signalbench/bench.hpp"

using signalbench::RunConfig;

int main(int argc, char** argv) {
  CLI::App app{"signalbench: a four-way intersection signal-control benchmark"};
  app.require_subcommand(1);

  std::string config_file, controller, scenario, out_dir, model;
  std::vector<std::uint64_t> seeds;
  std::vector<int> workers;
  int episodes = -1, rounds = -1, n_workers = -1;
  std::vector<std::string> sets;
  bool quiet = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON config file (flags override it)");
    cmd->add_option("--set", sets, "override a ledger constant, e.g. --set dqn.gamma=0.9");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seeds, "seed list, e.g. --seed 1,2,3")->delimiter(',');
    cmd->add_flag("--quiet", quiet, "suppress training progress on stderr");
  };

  CLI::App* eval = app.add_subcommand("eval", "run episodes, write step CSVs and a summary");
  add_common(eval);
  eval->add_option("--controller", controller, "rr | monopoly | dqn | a2c");
  eval->add_option("--scenario", scenario, "1 | 2 | 3 | all");
  eval->add_option("--model", model, "trained model file (required for dqn/a2c)");

  CLI::App* train = app.add_subcommand("train", "train dqn or a2c, write model + curve");
  add_common(train);
  train->add_option("--controller", controller, "dqn | a2c");
  train->add_option("--episodes", episodes, "dqn training episodes");
  train->add_option("--rounds", rounds, "a2c training rounds");
  train->add_option("--n-workers", n_workers, "a2c worker count");

  CLI::App* scaling = app.add_subcommand("scaling", "a2c worker-scaling report");
  add_common(scaling);
  scaling->add_option("--workers", workers, "worker counts, e.g. --workers 1,2,4")->delimiter(',');
  scaling->add_option("--rounds", rounds, "a2c training rounds per worker count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    RunConfig cfg;
    if (!config_file.empty()) cfg = signalbench::load_config(config_file);

    CLI::App* cmd = app.get_subcommands().front();
    cfg.mode = cmd->get_name();
    auto given = [&](const std::string& name) {
      const CLI::Option* opt = cmd->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--controller")) cfg.controller = controller;
    if (given("--scenario")) cfg.scenario = scenario;
    if (given("--out")) cfg.out_dir = out_dir;
    if (given("--model")) cfg.model_path = model;
    if (given("--seed")) cfg.seeds = seeds;
    if (given("--workers")) cfg.workers_list = workers;
    if (given("--episodes")) cfg.episodes = episodes;
    if (given("--rounds")) cfg.rounds = rounds;
    if (given("--n-workers")) cfg.n_workers = n_workers;
    for (const std::string& kv : sets) {
      std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw signalbench::UsageError("--set expects key=value (got '" + kv + "')");
      signalbench::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }

    std::ostream* progress = quiet ? nullptr : &std::clog;
    if (cfg.mode == "eval") {
      signalbench::run_eval(cfg);
    } else if (cfg.mode == "train") {
      signalbench::run_train(cfg, progress);
    } else {
      signalbench::run_scaling(cfg, progress);
    }
    return 0;
  } catch (const signalbench::UsageError& e) {
    std::cerr << "signalbench: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "signalbench: " << e.what() << "\n";
    return 2;
  }
}
