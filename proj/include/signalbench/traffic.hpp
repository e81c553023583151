#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "signalbench/sim.hpp"

namespace signalbench {

// The three demand patterns of the benchmark. SCEN-1 loads all arms equally,
// SCEN-2 concentrates demand on the N/S axis, SCEN-3 mirrors it onto E/W.
enum class Scenario : int { Scen1 = 1, Scen2 = 2, Scen3 = 3 };

Scenario scenario_from_int(int id);
std::string scenario_name(Scenario scen);  // "SCEN-1" etc., used in CSV output

// Per-movement spawn probabilities, indexed by Movement::index().
struct MovementDistribution {
  std::array<double, kNumMovements> p{};

  double operator[](const Movement& m) const { return p[m.index()]; }
};

MovementDistribution scenario_probabilities(Scenario scen);

struct GenConfig {
  int n_vehicles = 1000;
  int episode_length = 5400;
  double weibull_shape = 2.0;
  std::uint64_t seed = 0;
};

// Unit-scale Weibull quantile function, (-ln(1-u))^(1/shape).
double weibull_inverse_cdf(double shape, double u);

// Draws n_vehicles arrival times from Weibull(shape), rescales them affinely
// onto [0, episode_length-1], rounds to whole steps and sorts; movements are
// sampled from the scenario distribution on an independent substream so the
// route mix does not shift when n_vehicles changes.
RoutePlan generate_routes(const GenConfig& config, Scenario scen);

// CSV round trip; header `spawn_step,source,destination`, arms as N/E/S/W.
void write_route_csv(std::ostream& out, const RoutePlan& plan);
void write_route_csv(const std::filesystem::path& path, const RoutePlan& plan);
RoutePlan read_route_csv(std::istream& in);
RoutePlan read_route_csv(const std::filesystem::path& path);

}  // namespace signalbench
