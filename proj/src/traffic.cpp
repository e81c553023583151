#include "signalbench/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "signalbench/rng.hpp"

namespace signalbench {

namespace {

// Table-ordered movement list: the four straights, then the eight turns
// grouped by source arm. Matches Movement::from_index.
constexpr int kStraightCount = 4;

MovementDistribution make_distribution(double ns_straight, double ew_straight,
                                       double ns_turn, double ew_turn) {
  MovementDistribution d;
  for (int i = 0; i < kNumMovements; ++i) {
    Movement m = Movement::from_index(i);
    bool from_ns = m.source == Arm::North || m.source == Arm::South;
    if (i < kStraightCount) {
      d.p[i] = from_ns ? ns_straight : ew_straight;
    } else {
      d.p[i] = from_ns ? ns_turn : ew_turn;
    }
  }
  return d;
}

}  // namespace

Scenario scenario_from_int(int id) {
  if (id < 1 || id > 3) throw std::invalid_argument("scenario must be 1, 2 or 3");
  return static_cast<Scenario>(id);
}

std::string scenario_name(Scenario scen) {
  return "SCEN-" + std::to_string(static_cast<int>(scen));
}

MovementDistribution scenario_probabilities(Scenario scen) {
  switch (scen) {
    case Scenario::Scen1:
      return make_distribution(0.1875, 0.1875, 0.03125, 0.03125);
    case Scenario::Scen2:
      return make_distribution(0.3375, 0.0375, 0.05625, 0.00625);
    case Scenario::Scen3:
      return make_distribution(0.0375, 0.3375, 0.00625, 0.05625);
  }
  throw std::invalid_argument("bad scenario");
}

double weibull_inverse_cdf(double shape, double u) {
  if (!(shape > 0.0)) throw std::invalid_argument("weibull shape must be positive");
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("u must lie in [0, 1)");
  return std::pow(-std::log1p(-u), 1.0 / shape);
}

RoutePlan generate_routes(const GenConfig& config, Scenario scen) {
  if (config.n_vehicles <= 0) throw std::invalid_argument("n_vehicles must be positive");
  if (config.episode_length <= 0) throw std::invalid_argument("episode_length must be positive");

  Rng time_rng(derive_seed(config.seed, 0));
  Rng move_rng(derive_seed(config.seed, 1));

  std::vector<double> raw(config.n_vehicles);
  for (double& x : raw) x = weibull_inverse_cdf(config.weibull_shape, time_rng.uniform());
  auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  double lo = *lo_it, hi = *hi_it;
  double span = hi - lo;

  MovementDistribution dist = scenario_probabilities(scen);

  RoutePlan plan(config.n_vehicles);
  for (int i = 0; i < config.n_vehicles; ++i) {
    double scaled = span > 0.0 ? (raw[i] - lo) / span * (config.episode_length - 1) : 0.0;
    plan[i].spawn_step = static_cast<int>(std::llround(scaled));

    double u = move_rng.uniform();
    double cum = 0.0;
    int pick = kNumMovements - 1;
    for (int k = 0; k < kNumMovements; ++k) {
      cum += dist.p[k];
      if (u < cum) {
        pick = k;
        break;
      }
    }
    plan[i].movement = Movement::from_index(pick);
  }

  std::stable_sort(plan.begin(), plan.end(),
                   [](const RouteEntry& a, const RouteEntry& b) { return a.spawn_step < b.spawn_step; });
  return plan;
}

void write_route_csv(std::ostream& out, const RoutePlan& plan) {
  out << "spawn_step,source,destination\n";
  for (const RouteEntry& e : plan) {
    out << e.spawn_step << ',' << arm_letter(e.movement.source) << ','
        << arm_letter(e.movement.destination) << '\n';
  }
}

void write_route_csv(const std::filesystem::path& path, const RoutePlan& plan) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_route_csv(out, plan);
}

RoutePlan read_route_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("route csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "spawn_step,source,destination")
    throw std::runtime_error("route csv: unexpected header '" + line + "'");

  RoutePlan plan;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string step_s, src_s, dst_s;
    if (!std::getline(row, step_s, ',') || !std::getline(row, src_s, ',') ||
        !std::getline(row, dst_s)) {
      throw std::runtime_error("route csv: malformed line " + std::to_string(line_no));
    }
    if (src_s.size() != 1 || dst_s.size() != 1)
      throw std::runtime_error("route csv: bad arm on line " + std::to_string(line_no));
    RouteEntry e;
    try {
      e.spawn_step = std::stoi(step_s);
    } catch (const std::exception&) {
      throw std::runtime_error("route csv: bad step on line " + std::to_string(line_no));
    }
    e.movement = Movement{arm_from_letter(src_s[0]), arm_from_letter(dst_s[0])};
    e.movement.kind();  // validates the pair
    plan.push_back(e);
  }
  return plan;
}

RoutePlan read_route_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_route_csv(in);
}

}  // namespace signalbench
