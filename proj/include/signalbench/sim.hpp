#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace signalbench {

/// Incoming approaches of the junction. The ordering N < E < S < W is fixed
/// and used everywhere an arm indexes an array.
enum class Arm : int { North = 0, East = 1, South = 2, West = 3 };

inline constexpr int kNumArms = 4;
inline constexpr std::array<Arm, 4> kArmOrder = {Arm::North, Arm::East, Arm::South, Arm::West};

constexpr int arm_index(Arm a) { return static_cast<int>(a); }
constexpr Arm arm_from_index(int i) { return static_cast<Arm>(i); }
constexpr Arm opposite(Arm a) { return arm_from_index((arm_index(a) + 2) % 4); }
char arm_letter(Arm a);
Arm arm_from_letter(char c);

enum class Turn { Straight, Left, Right };

/// One of the 12 origin/destination pairs a vehicle can drive.
struct Movement {
  Arm source;
  Arm destination;

  /// Left turns exit one position clockwise (N->E), right turns one
  /// counter-clockwise (N->W); opposite arms are straight-through.
  Turn kind() const;

  /// Canonical index 0..11: the four straights (N->S, S->N, E->W, W->E)
  /// followed by the eight turns (N->E, N->W, S->W, S->E, E->N, E->S,
  /// W->S, W->N).
  int index() const;
  static Movement from_index(int i);

  bool operator==(const Movement&) const = default;
};

inline constexpr int kNumMovements = 12;

/// Geometry and timing constants of the surrogate intersection model.
struct SimConfig {
  double road_length = 242.8;        // meters per incoming arm
  double free_speed = 13.89;         // m/s while not queued
  double vehicle_space = 7.5;        // meters of queue per vehicle (length + gap)
  double saturation_headway = 2.0;   // seconds per discharged vehicle under green
  int yellow_duration = 3;           // timesteps
  double step_duration = 1.0;        // seconds per timestep
  int episode_length = 5400;         // timesteps per episode

  /// Vehicles that fit in one arm's queue.
  int queue_capacity() const { return static_cast<int>(road_length / vehicle_space); }
};

enum class PhaseKind { Green, Yellow };

/// Active signal phase; the three arms not named are red.
struct Phase {
  PhaseKind kind = PhaseKind::Green;
  Arm arm = Arm::North;
  int remaining = 0;  // timesteps left before a new directive is required
};

/// A controller decision consumed by the simulation at a phase boundary.
struct PhaseDirective {
  PhaseKind kind = PhaseKind::Green;
  Arm arm = Arm::North;
  int duration = 1;
};

inline PhaseDirective green(Arm a, int duration) { return {PhaseKind::Green, a, duration}; }
inline PhaseDirective yellow(Arm a, int duration) { return {PhaseKind::Yellow, a, duration}; }

struct Vehicle {
  std::int64_t id = 0;
  Movement movement{};
  int spawn_step = 0;
  double position = 0.0;  // meters of vehicle front from arm entry, in [0, road_length]
  bool queued = false;
  int wait_steps = 0;     // steps spent queued so far
  double last_speed = 0.0;
};

struct RouteEntry {
  int spawn_step = 0;
  Movement movement{};
};

/// Ordered (by spawn step) list of vehicles to inject over an episode.
using RoutePlan = std::vector<RouteEntry>;

/// Boolean occupancy of the 36 distance cells (9 per arm, arm-major layout).
using CellStateVector = std::array<std::uint8_t, 36>;

inline constexpr int kCellsPerArm = 9;
/// Upper distance-from-stop-line bound of cells 0..7; cell 8 extends to the
/// arm entry. Cell widths grow away from the light.
inline constexpr std::array<double, 8> kCellUpperBounds = {7, 14, 21, 28, 42, 63, 105, 168};

struct StepEvents {
  std::vector<std::int64_t> spawned;
  std::vector<std::int64_t> departed;
  Phase phase;
};

/// Deterministic 1 s/step point-queue model of the four-arm single-lane
/// junction. Vehicles travel at free speed, stack into per-arm queues at the
/// stop line (slot i sits vehicle_space * i meters upstream of it), and the
/// green arm discharges one vehicle per saturation_headway seconds.
class Simulation {
 public:
  /// Validates the plan (sorted spawn steps inside the episode window).
  Simulation(SimConfig config, RoutePlan routes);

  /// Advances one timestep. A directive is required exactly when the current
  /// phase has no remaining time; supplying one mid-phase is an error.
  StepEvents step(std::optional<PhaseDirective> directive = std::nullopt);

  int queue_length(Arm a) const;
  int total_queue() const;
  double queue_length_meters(Arm a) const { return queue_length(a) * config_.vehicle_space; }

  /// Mean over on-network vehicles of last-step speed (queued vehicles count
  /// as 0), clamped to >= 0.1 m/s; free_speed when the network is empty.
  double average_speed() const;

  /// Total queued vehicle-steps accrued since step 0, departed vehicles
  /// included. Monotone non-decreasing.
  std::int64_t cumulative_wait() const { return cumulative_wait_; }

  CellStateVector encode_cell_state() const;

  int step_count() const { return step_; }
  const Phase& phase() const { return phase_; }
  const SimConfig& config() const { return config_; }

  std::int64_t spawned_total() const { return spawned_total_; }
  std::int64_t departed_total() const { return departed_total_; }
  int on_network() const;
  int pending_spawns() const;
  double discharge_credit() const { return discharge_credit_; }

  const std::vector<Vehicle>& arm_vehicles(Arm a) const { return arms_[arm_index(a)]; }

 private:
  void apply_directive(const PhaseDirective& d);
  void spawn_vehicles(StepEvents& ev);
  void move_vehicles();
  void discharge_green(StepEvents& ev);

  struct PendingSpawn {
    std::int64_t id;
    Movement movement;
    int spawn_step;
  };

  SimConfig config_;
  RoutePlan routes_;
  std::size_t route_cursor_ = 0;
  std::array<std::vector<Vehicle>, 4> arms_;         // sorted by position descending
  std::array<int, 4> queued_count_{0, 0, 0, 0};
  std::array<std::deque<PendingSpawn>, 4> blocked_;  // spawns held by a full arm
  Phase phase_{PhaseKind::Green, Arm::North, 0};
  int step_ = 0;
  std::int64_t spawned_total_ = 0;
  std::int64_t departed_total_ = 0;
  double discharge_credit_ = 0.0;
  std::int64_t cumulative_wait_ = 0;
};

}  // namespace signalbench
