#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "signalbench/nn.hpp"
#include "signalbench/rng.hpp"
#include "signalbench/sim.hpp"
#include "signalbench/traffic.hpp"

namespace signalbench {

// A controller is polled exactly when the running phase expires and must
// answer with the next directive.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual PhaseDirective next(const Simulation& sim) = 0;
  virtual void begin_episode() { }
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------- round robin

struct RrConfig {
  int green_quantum = 30;
  int yellow_quantum = 3;
};

// Fixed cycle Green(N,30) Yellow(N,3) Green(E,30) ... independent of traffic.
class RoundRobinController : public Controller {
 public:
  explicit RoundRobinController(RrConfig cfg = {});
  PhaseDirective next(const Simulation& sim) override;
  void begin_episode() override { position_ = 0; }
  std::string name() const override { return "rr"; }

 private:
  RrConfig cfg_;
  int position_ = 0;  // 0..7 over (green, yellow) x 4 arms
};

// ------------------------------------------------------------------- monopoly

struct MonopolyConfig {
  int min_time = 5;
  int max_time = 60;
  int time_step = 5;
  int yellow_quantum = 3;

  std::vector<int> action_set() const;
};

struct MonopolyObservation {
  double s_t = 0.0;  // queue length of the arm on turn, meters
  double v_t = 0.1;  // average junction speed last step, m/s
};

// argmin over the action set of |s_t - v_t * a|; ties go to the larger a.
int monopoly_best_action(const MonopolyObservation& obs, const MonopolyConfig& cfg);

// Serves arms in fixed N,E,S,W turns; each green length chosen to clear the
// queue the turn's arm has right now, followed by the mandatory yellow.
class MonopolyController : public Controller {
 public:
  explicit MonopolyController(MonopolyConfig cfg = {});
  PhaseDirective next(const Simulation& sim) override;
  void begin_episode() override;
  std::string name() const override { return "monopoly"; }

 private:
  MonopolyConfig cfg_;
  int turn_ = 0;
  bool yellow_pending_ = false;
  Arm current_ = Arm::North;
};

// ------------------------------------------------- shared RL acting machinery

struct Transition {
  CellStateVector s{};
  int a = 0;  // arm index 0..3 = N,E,S,W
  double r = 0.0;
  CellStateVector s_next{};
};

Eigen::VectorXd cell_state_to_vector(const CellStateVector& s);

// Base for the learned controllers: picks an arm at each decision point and
// inserts Yellow(previous arm, yellow_duration) whenever the arm changes. The
// yellow itself is not a decision point. The optional decision hook fires at
// every decision with the observed cell state and chosen action, which is how
// the trainers assemble transitions.
class PhasedAgentController : public Controller {
 public:
  using DecisionHook = std::function<void(const CellStateVector& s, int action, const Simulation&)>;

  PhaseDirective next(const Simulation& sim) final;
  void begin_episode() override;
  void set_decision_hook(DecisionHook hook) { hook_ = std::move(hook); }

 protected:
  PhasedAgentController(int green_duration, int yellow_duration);
  virtual int decide(const Simulation& sim) = 0;

 private:
  int green_duration_, yellow_duration_;
  Arm current_ = Arm::North;
  bool staged_ = false;
  Arm staged_arm_ = Arm::North;
  DecisionHook hook_;
};

// ------------------------------------------------------------------------ dqn

struct DqnConfig {
  double gamma = 0.75;
  double learning_rate = 0.001;
  int green_duration = 10;
  int yellow_duration = 3;
  int episodes = 100;
  int replay_samples_per_episode = 800;
  int replay_capacity = 50000;
  int batch_size = 100;
  int min_replay_before_training = 600;
  int hidden_layers = 5;
  int hidden_width = 64;
};

Mlp make_qnet(const DqnConfig& cfg, std::uint64_t seed);

// Epsilon-greedy over the 4 Q-values; greedy ties break to the lowest index.
int dqn_select_action(const Mlp& qnet, const CellStateVector& s, double epsilon, Rng& rng);

double dqn_reward(std::int64_t wait_prev, std::int64_t wait_cur);

double q_target(double r, double gamma, const Eigen::VectorXd& q_next);

// One batched replay pass: sampled targets per q_target, squared-error
// gradient step. Returns false (no-op) while the buffer is under the
// training threshold. Never mutates the buffer.
bool dqn_replay_update(Mlp& qnet, const ReplayBuffer<Transition>& buffer, const DqnConfig& cfg,
                       Rng& rng, Optimizer& opt);

class DqnController : public PhasedAgentController {
 public:
  // Evaluation: owns a trained net, acts greedily.
  explicit DqnController(Mlp qnet, DqnConfig cfg = {});
  // Training: borrows the net being trained and an exploration stream.
  DqnController(const Mlp* qnet, Rng* rng, DqnConfig cfg);

  void set_epsilon(double e) { epsilon_ = e; }
  std::string name() const override { return "dqn"; }

 protected:
  int decide(const Simulation& sim) override;

 private:
  Mlp owned_;
  const Mlp* qnet_;
  DqnConfig cfg_;
  double epsilon_ = 0.0;
  Rng* rng_;
  Rng fallback_rng_{0};
};

struct DqnTrainResult {
  Mlp qnet;
  std::vector<double> episode_rewards;  // sum of rewards per episode
  std::vector<double> episode_waits;    // end-of-episode cumulative wait
  std::vector<double> episode_wall_ms;  // per-episode train time, route generation excluded
};

// 100 episodes cycling SCEN-1/2/3 with epsilon(e) = 1 - e/episodes; after
// each episode the replay buffer is sampled cfg.replay_samples_per_episode
// times. Deterministic for a fixed seed.
DqnTrainResult dqn_train(const DqnConfig& cfg, const SimConfig& sim_cfg, const GenConfig& gen_cfg,
                         std::uint64_t seed, std::ostream* progress = nullptr);

// ------------------------------------------------------------------------ a2c

struct A2cConfig {
  double gamma = 0.75;
  double learning_rate = 0.001;
  int n_workers = 1;
  double entropy_coefficient = 0.01;
  double value_loss_coefficient = 0.5;
  int update_horizon = 8;  // decisions per a2c_update call
  int green_duration = 10;
  int yellow_duration = 3;
  int rounds = 30;  // episode rounds; every round ends in a weight sync
  int trunk_width = 64;
  // Wait-delta rewards are O(hundreds) per decision; raw advantages of that
  // size swamp the entropy term and drive the softmax into a corner before
  // the value head can catch up. Scaling rewards into O(1) keeps the policy
  // gradient and entropy regularizer on comparable footing.
  double reward_scale = 0.001;
};

// Shared two-layer trunk with a softmax policy head and a scalar value head.
struct ActorCriticNet {
  Mlp trunk;   // 36 -> 64 -> 64, rectified-linear
  Mlp policy;  // 64 -> 4, softmax
  Mlp value;   // 64 -> 1, linear

  ActorCriticNet() = default;
  ActorCriticNet(const A2cConfig& cfg, std::uint64_t seed);

  // pi(.|s) and V(s) for a single state.
  std::pair<Eigen::VectorXd, double> evaluate(const CellStateVector& s) const;
  bool same_architecture(const ActorCriticNet& other) const;
};

double a2c_advantage(double r, double gamma, double v_next, double v_cur);

struct A2cOptimizer {
  Optimizer trunk, policy, value;
  explicit A2cOptimizer(double lr, Optimizer::Method method = Optimizer::Method::Adam)
      : trunk(method, lr), policy(method, lr), value(method, lr) { }
};

// One gradient step on sum over the trajectory chunk of
//   -log pi(a|s) * advantage + value_coef * advantage^2 - entropy_coef * H(pi)
// with the advantage treated as a constant in the policy term.
void a2c_update(ActorCriticNet& net, const std::vector<Transition>& chunk, const A2cConfig& cfg,
                A2cOptimizer& opt);

// Parameter-mean of the workers (fixed order), written back to every worker.
ActorCriticNet a2c_sync(std::vector<ActorCriticNet>& workers);

class A2cController : public PhasedAgentController {
 public:
  // Evaluation: greedy argmax of the policy head.
  explicit A2cController(ActorCriticNet net, A2cConfig cfg = {});
  // Training: borrows the worker net, samples actions from pi.
  A2cController(const ActorCriticNet* net, Rng* rng, A2cConfig cfg);

  std::string name() const override { return "a2c"; }

 protected:
  int decide(const Simulation& sim) override;

 private:
  ActorCriticNet owned_;
  const ActorCriticNet* net_;
  Rng* rng_;  // null = greedy
};

struct A2cTrainResult {
  ActorCriticNet net;
  std::vector<std::vector<double>> worker_rewards;  // [round][worker]
  std::vector<std::vector<double>> worker_waits;    // [round][worker] end-of-episode wait
  std::vector<double> round_wall_ms;                // route generation excluded
  double wall_seconds = 0.0;                        // sum of the round times
  double env_steps_per_second = 0.0;
};

// Each round: n_workers threads copy the global net, run one full episode on
// private environments (scenario = round % 3 + 1, per-worker route seeds),
// update their local nets every update_horizon decisions, then barrier; the
// main thread averages the workers into the global net. Worker results are
// independent of thread scheduling.
A2cTrainResult a2c_train(const A2cConfig& cfg, const SimConfig& sim_cfg, const GenConfig& gen_cfg,
                         std::uint64_t seed, std::ostream* progress = nullptr);

// A2C model file: "SBAC" tag + version + the three MLP blocks.
void save_a2c(const std::filesystem::path& path, const ActorCriticNet& net);
void save_a2c(std::ostream& out, const ActorCriticNet& net);
ActorCriticNet load_a2c(std::istream& in);
ActorCriticNet load_a2c(const std::filesystem::path& path);

}  // namespace signalbench
