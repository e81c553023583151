#include "signalbench/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace signalbench {

char arm_letter(Arm a) {
  switch (a) {
    case Arm::North: return 'N';
    case Arm::East: return 'E';
    case Arm::South: return 'S';
    case Arm::West: return 'W';
  }
  throw std::invalid_argument("bad arm value");
}

Arm arm_from_letter(char c) {
  switch (c) {
    case 'N': return Arm::North;
    case 'E': return Arm::East;
    case 'S': return Arm::South;
    case 'W': return Arm::West;
  }
  throw std::invalid_argument(std::string("bad arm letter '") + c + "'");
}

Turn Movement::kind() const {
  int delta = (arm_index(destination) - arm_index(source) + 4) % 4;
  switch (delta) {
    case 1: return Turn::Left;
    case 2: return Turn::Straight;
    case 3: return Turn::Right;
  }
  throw std::invalid_argument("movement source equals destination");
}

namespace {
constexpr std::array<std::pair<Arm, Arm>, kNumMovements> kMovementTable = {{
    {Arm::North, Arm::South},
    {Arm::South, Arm::North},
    {Arm::East, Arm::West},
    {Arm::West, Arm::East},
    {Arm::North, Arm::East},
    {Arm::North, Arm::West},
    {Arm::South, Arm::West},
    {Arm::South, Arm::East},
    {Arm::East, Arm::North},
    {Arm::East, Arm::South},
    {Arm::West, Arm::South},
    {Arm::West, Arm::North},
}};
}  // namespace

int Movement::index() const {
  for (int i = 0; i < kNumMovements; ++i) {
    if (kMovementTable[i].first == source && kMovementTable[i].second == destination) return i;
  }
  throw std::invalid_argument("not a valid movement");
}

Movement Movement::from_index(int i) {
  if (i < 0 || i >= kNumMovements) throw std::invalid_argument("movement index out of range");
  return {kMovementTable[i].first, kMovementTable[i].second};
}

Simulation::Simulation(SimConfig config, RoutePlan routes)
    : config_(config), routes_(std::move(routes)) {
  int prev = 0;
  for (std::size_t i = 0; i < routes_.size(); ++i) {
    const RouteEntry& e = routes_[i];
    if (e.spawn_step < prev) {
      throw std::invalid_argument("route plan not sorted by spawn step at entry " +
                                  std::to_string(i));
    }
    if (e.spawn_step < 0 || e.spawn_step >= config_.episode_length) {
      throw std::invalid_argument("route entry " + std::to_string(i) + " spawns at step " +
                                  std::to_string(e.spawn_step) + ", outside [0, " +
                                  std::to_string(config_.episode_length) + ")");
    }
    if (e.movement.source == e.movement.destination) {
      throw std::invalid_argument("route entry " + std::to_string(i) +
                                  " has equal source and destination");
    }
    prev = e.spawn_step;
  }
}

void Simulation::apply_directive(const PhaseDirective& d) {
  if (d.duration < 1) throw std::invalid_argument("directive duration must be >= 1");
  if (d.kind == PhaseKind::Green && phase_.kind == PhaseKind::Green && d.arm != phase_.arm) {
    throw std::logic_error("green-to-green switch without an intervening yellow");
  }
  if (d.kind == PhaseKind::Yellow && d.arm != phase_.arm) {
    throw std::logic_error("yellow must be shown to the outgoing arm");
  }
  // Extending the same phase keeps the accumulated discharge credit.
  if (d.kind != phase_.kind || d.arm != phase_.arm) discharge_credit_ = 0.0;
  phase_ = Phase{d.kind, d.arm, d.duration};
}

void Simulation::spawn_vehicles(StepEvents& ev) {
  while (route_cursor_ < routes_.size() && routes_[route_cursor_].spawn_step == step_) {
    const RouteEntry& e = routes_[route_cursor_];
    blocked_[arm_index(e.movement.source)].push_back(
        {static_cast<std::int64_t>(route_cursor_), e.movement, e.spawn_step});
    ++route_cursor_;
  }
  const int capacity = config_.queue_capacity();
  for (Arm a : kArmOrder) {
    auto& pending = blocked_[arm_index(a)];
    auto& lane = arms_[arm_index(a)];
    while (!pending.empty() && static_cast<int>(lane.size()) < capacity) {
      const PendingSpawn& p = pending.front();
      Vehicle v;
      v.id = p.id;
      v.movement = p.movement;
      v.spawn_step = p.spawn_step;
      v.position = 0.0;
      lane.push_back(v);
      ev.spawned.push_back(v.id);
      ++spawned_total_;
      pending.pop_front();
    }
  }
}

void Simulation::move_vehicles() {
  const double dt = config_.step_duration;
  const double max_advance = config_.free_speed * dt;
  for (int ai = 0; ai < kNumArms; ++ai) {
    auto& lane = arms_[ai];
    int slots = queued_count_[ai];
    for (std::size_t i = slots; i < lane.size(); ++i) {
      Vehicle& v = lane[i];
      double target = config_.road_length - config_.vehicle_space * slots;
      double gap = target - v.position;
      if (gap <= max_advance) {
        // Reached the back of the queue (or the stop line). Snap onto the
        // slot; co-spawned vehicles at the same position may snap backwards.
        v.last_speed = std::max(0.0, gap) / dt;
        v.position = target;
        v.queued = true;
        ++slots;
      } else {
        v.position += max_advance;
        v.last_speed = config_.free_speed;
      }
    }
    queued_count_[ai] = slots;
  }
}

void Simulation::discharge_green(StepEvents& ev) {
  if (phase_.kind != PhaseKind::Green) return;
  const int ai = arm_index(phase_.arm);
  auto& lane = arms_[ai];
  discharge_credit_ += config_.step_duration / config_.saturation_headway;
  while (discharge_credit_ >= 1.0 && queued_count_[ai] > 0) {
    ev.departed.push_back(lane.front().id);
    lane.erase(lane.begin());
    --queued_count_[ai];
    ++departed_total_;
    discharge_credit_ -= 1.0;
    // Point-queue slot shift: everyone still queued moves up instantly.
    for (int s = 0; s < queued_count_[ai]; ++s) {
      lane[s].position = config_.road_length - config_.vehicle_space * s;
      lane[s].last_speed = 0.0;
    }
  }
  // Credit cannot be banked while nobody is waiting, or a later burst would
  // exceed the one-per-headway discharge bound.
  if (queued_count_[ai] == 0) discharge_credit_ = 0.0;
}

StepEvents Simulation::step(std::optional<PhaseDirective> directive) {
  if (phase_.remaining == 0) {
    if (!directive) {
      throw std::logic_error("phase expired at step " + std::to_string(step_) +
                             ": a directive is required");
    }
    apply_directive(*directive);
  } else if (directive) {
    throw std::logic_error("directive supplied mid-phase at step " + std::to_string(step_) +
                           " (remaining " + std::to_string(phase_.remaining) + ")");
  }

  StepEvents ev;
  spawn_vehicles(ev);
  move_vehicles();
  discharge_green(ev);

  for (auto& lane : arms_) {
    for (Vehicle& v : lane) {
      if (v.queued) {
        ++v.wait_steps;
        ++cumulative_wait_;
      }
    }
  }

  --phase_.remaining;
  ++step_;
  ev.phase = phase_;
  return ev;
}

int Simulation::queue_length(Arm a) const { return queued_count_[arm_index(a)]; }

int Simulation::total_queue() const {
  return queued_count_[0] + queued_count_[1] + queued_count_[2] + queued_count_[3];
}

double Simulation::average_speed() const {
  int n = 0;
  double sum = 0.0;
  for (const auto& lane : arms_) {
    for (const Vehicle& v : lane) {
      sum += v.queued ? 0.0 : v.last_speed;
      ++n;
    }
  }
  if (n == 0) return config_.free_speed;
  return std::max(sum / n, 0.1);
}

CellStateVector Simulation::encode_cell_state() const {
  CellStateVector cells{};
  for (int ai = 0; ai < kNumArms; ++ai) {
    for (const Vehicle& v : arms_[ai]) {
      double dist = config_.road_length - v.position;
      int c = kCellsPerArm - 1;
      for (int k = 0; k < static_cast<int>(kCellUpperBounds.size()); ++k) {
        if (dist < kCellUpperBounds[k]) {
          c = k;
          break;
        }
      }
      cells[ai * kCellsPerArm + c] = 1;
    }
  }
  return cells;
}

int Simulation::on_network() const {
  int n = 0;
  for (const auto& lane : arms_) n += static_cast<int>(lane.size());
  return n;
}

int Simulation::pending_spawns() const {
  int n = static_cast<int>(routes_.size() - route_cursor_);
  for (const auto& q : blocked_) n += static_cast<int>(q.size());
  return n;
}

}  // namespace signalbench
