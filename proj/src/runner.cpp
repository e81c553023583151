#include "signalbench/runner.hpp"

namespace signalbench {

EpisodeLog run_episode(const SimConfig& sim_cfg, const RoutePlan& plan, Controller& ctl,
                       Scenario scen, std::uint64_t seed) {
  Simulation sim(sim_cfg, plan);
  EpisodeLog log;
  log.controller = ctl.name();
  log.scenario = scen;
  log.seed = seed;
  log.records.reserve(static_cast<std::size_t>(sim_cfg.episode_length));

  ctl.begin_episode();
  for (int t = 0; t < sim_cfg.episode_length; ++t) {
    if (sim.phase().remaining == 0) {
      sim.step(ctl.next(sim));
    } else {
      sim.step();
    }
    StepRecord rec;
    rec.step = t;
    rec.total_queue = sim.total_queue();
    for (int a = 0; a < 4; ++a) rec.queue[a] = sim.queue_length(arm_from_index(a));
    rec.cum_wait = sim.cumulative_wait();
    const Phase& p = sim.phase();
    rec.phase = std::string(1, p.kind == PhaseKind::Green ? 'G' : 'Y') + ':' + arm_letter(p.arm);
    log.records.push_back(std::move(rec));
  }
  return log;
}

}  // namespace signalbench
