#pragma once

#include "signalbench/controllers.hpp"
#include "signalbench/metrics.hpp"

namespace signalbench {

// Runs one full episode of the controller against the route plan, recording
// one StepRecord per step (0 .. episode_length-1).
EpisodeLog run_episode(const SimConfig& sim_cfg, const RoutePlan& plan, Controller& ctl,
                       Scenario scen, std::uint64_t seed);

}  // namespace signalbench
