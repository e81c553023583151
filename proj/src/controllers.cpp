#include "signalbench/controllers.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace signalbench {

// ---------------------------------------------------------------- round robin

RoundRobinController::RoundRobinController(RrConfig cfg) : cfg_(cfg) {
  if (cfg_.green_quantum < 1 || cfg_.yellow_quantum < 1)
    throw std::invalid_argument("rr quanta must be at least 1");
}

PhaseDirective RoundRobinController::next(const Simulation&) {
  Arm arm = kArmOrder[position_ / 2];
  bool is_green = position_ % 2 == 0;
  position_ = (position_ + 1) % 8;
  return is_green ? green(arm, cfg_.green_quantum) : yellow(arm, cfg_.yellow_quantum);
}

// ------------------------------------------------------------------- monopoly

std::vector<int> MonopolyConfig::action_set() const {
  if (min_time < 1 || time_step < 1 || max_time < min_time)
    throw std::invalid_argument("monopoly action set is empty or invalid");
  std::vector<int> out;
  for (int a = min_time; a <= max_time; a += time_step) out.push_back(a);
  return out;
}

int monopoly_best_action(const MonopolyObservation& obs, const MonopolyConfig& cfg) {
  if (obs.v_t < 0.1) throw std::invalid_argument("monopoly observation speed below 0.1");
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int a : cfg.action_set()) {
    double cost = std::abs(obs.s_t - obs.v_t * static_cast<double>(a));
    if (cost <= best_cost) {  // <= : ties resolve toward the larger duration
      best_cost = cost;
      best = a;
    }
  }
  return best;
}

MonopolyController::MonopolyController(MonopolyConfig cfg) : cfg_(cfg) {
  cfg_.action_set();  // validates
  if (cfg_.yellow_quantum < 1) throw std::invalid_argument("yellow quantum must be at least 1");
}

void MonopolyController::begin_episode() {
  turn_ = 0;
  yellow_pending_ = false;
  current_ = Arm::North;
}

PhaseDirective MonopolyController::next(const Simulation& sim) {
  if (yellow_pending_) {
    yellow_pending_ = false;
    turn_ = (turn_ + 1) % 4;
    return yellow(current_, cfg_.yellow_quantum);
  }
  current_ = kArmOrder[turn_];
  MonopolyObservation obs{sim.queue_length_meters(current_), sim.average_speed()};
  yellow_pending_ = true;
  return green(current_, monopoly_best_action(obs, cfg_));
}

// ------------------------------------------------- shared RL acting machinery

Eigen::VectorXd cell_state_to_vector(const CellStateVector& s) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

PhasedAgentController::PhasedAgentController(int green_duration, int yellow_duration)
    : green_duration_(green_duration), yellow_duration_(yellow_duration) {
  if (green_duration_ < 1 || yellow_duration_ < 1)
    throw std::invalid_argument("phase durations must be at least 1");
}

void PhasedAgentController::begin_episode() {
  current_ = Arm::North;
  staged_ = false;
}

PhaseDirective PhasedAgentController::next(const Simulation& sim) {
  if (staged_) {
    staged_ = false;
    current_ = staged_arm_;
    return green(current_, green_duration_);
  }
  CellStateVector s = sim.encode_cell_state();
  int a = decide(sim);
  if (hook_) hook_(s, a, sim);
  Arm target = arm_from_index(a);
  if (target == current_) return green(current_, green_duration_);
  staged_ = true;
  staged_arm_ = target;
  return yellow(current_, yellow_duration_);
}

// ------------------------------------------------------------------------ dqn

Mlp make_qnet(const DqnConfig& cfg, std::uint64_t seed) {
  std::vector<int> sizes{static_cast<int>(kCellsPerArm) * 4};
  for (int i = 0; i < cfg.hidden_layers; ++i) sizes.push_back(cfg.hidden_width);
  sizes.push_back(4);
  std::vector<Activation> acts(sizes.size() - 1, Activation::Relu);
  acts.back() = Activation::Linear;
  return Mlp(sizes, acts, seed);
}

int dqn_select_action(const Mlp& qnet, const CellStateVector& s, double epsilon, Rng& rng) {
  if (qnet.input_size() != static_cast<int>(s.size()) || qnet.output_size() != 4)
    throw std::invalid_argument("q-network arity must be 36 in, 4 out");
  if (rng.uniform() < epsilon) return static_cast<int>(rng.uniform_int(4));
  Eigen::VectorXd q = qnet.forward1(cell_state_to_vector(s));
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (q(i) > q(best)) best = i;
  return best;
}

double dqn_reward(std::int64_t wait_prev, std::int64_t wait_cur) {
  return static_cast<double>(wait_prev - wait_cur);
}

double q_target(double r, double gamma, const Eigen::VectorXd& q_next) {
  if (q_next.size() == 0) throw std::invalid_argument("q_target needs at least one q value");
  return r + gamma * q_next.maxCoeff();
}

bool dqn_replay_update(Mlp& qnet, const ReplayBuffer<Transition>& buffer, const DqnConfig& cfg,
                       Rng& rng, Optimizer& opt) {
  if (buffer.size() < static_cast<std::size_t>(cfg.min_replay_before_training)) return false;

  std::vector<Transition> batch = buffer.sample(cfg.batch_size, rng);
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index dim = qnet.input_size();
  Eigen::MatrixXd s(dim, n), s_next(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.col(i) = cell_state_to_vector(batch[i].s);
    s_next.col(i) = cell_state_to_vector(batch[i].s_next);
  }

  Eigen::MatrixXd q_next = qnet.forward(s_next);
  ForwardCache cache;
  Eigen::MatrixXd q = qnet.forward(s, &cache);
  Eigen::MatrixXd target = q;
  for (Eigen::Index i = 0; i < n; ++i)
    target(batch[i].a, i) = q_target(batch[i].r, cfg.gamma, q_next.col(i));

  // Mean squared error over the batch; only chosen actions carry error.
  Eigen::MatrixXd out_grad = (2.0 / static_cast<double>(n)) * (q - target);
  MlpGradients grads;
  qnet.backward(cache, out_grad, &grads);
  opt.step(qnet, grads);
  return true;
}

DqnController::DqnController(Mlp qnet, DqnConfig cfg)
    : PhasedAgentController(cfg.green_duration, cfg.yellow_duration),
      owned_(std::move(qnet)),
      qnet_(&owned_),
      cfg_(cfg),
      rng_(nullptr) { }

DqnController::DqnController(const Mlp* qnet, Rng* rng, DqnConfig cfg)
    : PhasedAgentController(cfg.green_duration, cfg.yellow_duration),
      qnet_(qnet),
      cfg_(cfg),
      rng_(rng) { }

int DqnController::decide(const Simulation& sim) {
  return dqn_select_action(*qnet_, sim.encode_cell_state(), epsilon_,
                           rng_ ? *rng_ : fallback_rng_);
}

namespace {

// Drives one full episode; the controller is polled at every phase expiry.
void drive(Simulation& sim, Controller& ctl, int episode_length) {
  ctl.begin_episode();
  for (int t = 0; t < episode_length; ++t) {
    if (sim.phase().remaining == 0) {
      sim.step(ctl.next(sim));
    } else {
      sim.step();
    }
  }
}

// Assembles transitions out of decision-hook firings: each decision closes
// the previous one (reward = drop in cumulative wait between the decision
// points), and finish() closes the last against the end-of-episode state.
struct TransitionAssembler {
  std::function<void(const Transition&)> emit;
  bool pending = false;
  CellStateVector s{};
  int a = 0;
  std::int64_t wait = 0;
  double total_reward = 0.0;

  void on_decision(const CellStateVector& state, int action, const Simulation& sim) {
    if (pending) complete(state, sim.cumulative_wait());
    pending = true;
    s = state;
    a = action;
    wait = sim.cumulative_wait();
  }

  void finish(const Simulation& sim) {
    if (pending) complete(sim.encode_cell_state(), sim.cumulative_wait());
    pending = false;
  }

 private:
  void complete(const CellStateVector& s_next, std::int64_t wait_now) {
    Transition t{s, a, dqn_reward(wait, wait_now), s_next};
    total_reward += t.r;
    emit(t);
  }
};

}  // namespace

DqnTrainResult dqn_train(const DqnConfig& cfg, const SimConfig& sim_cfg, const GenConfig& gen_cfg,
                         std::uint64_t seed, std::ostream* progress) {
  DqnTrainResult res;
  res.qnet = make_qnet(cfg, derive_seed(seed, 1));
  Optimizer opt(Optimizer::Method::Adam, cfg.learning_rate);
  ReplayBuffer<Transition> buffer(static_cast<std::size_t>(cfg.replay_capacity));

  for (int e = 0; e < cfg.episodes; ++e) {
    Scenario scen = scenario_from_int(e % 3 + 1);
    GenConfig gen = gen_cfg;
    gen.seed = derive_seed(seed, 1000 + static_cast<std::uint64_t>(e));
    RoutePlan routes = generate_routes(gen, scen);
    Simulation sim(sim_cfg, routes);

    auto t0 = std::chrono::steady_clock::now();
    Rng explore(derive_seed(seed, 2000 + static_cast<std::uint64_t>(e)));
    DqnController ctl(&res.qnet, &explore, cfg);
    ctl.set_epsilon(1.0 - static_cast<double>(e) / static_cast<double>(cfg.episodes));

    TransitionAssembler assembler;
    assembler.emit = [&](const Transition& t) { buffer.push(t); };
    ctl.set_decision_hook([&](const CellStateVector& s, int a, const Simulation& sm) {
      assembler.on_decision(s, a, sm);
    });

    drive(sim, ctl, sim_cfg.episode_length);
    assembler.finish(sim);
    res.episode_rewards.push_back(assembler.total_reward);
    res.episode_waits.push_back(static_cast<double>(sim.cumulative_wait()));

    Rng update_rng(derive_seed(seed, 3000 + static_cast<std::uint64_t>(e)));
    for (int k = 0; k < cfg.replay_samples_per_episode; ++k)
      dqn_replay_update(res.qnet, buffer, cfg, update_rng, opt);
    auto t1 = std::chrono::steady_clock::now();
    res.episode_wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());

    if (progress) {
      *progress << "dqn episode " << e << " scenario " << scenario_name(scen) << " epsilon "
                << (1.0 - static_cast<double>(e) / cfg.episodes) << " reward "
                << assembler.total_reward << " buffer " << buffer.size() << "\n";
    }
  }
  return res;
}

// ------------------------------------------------------------------------ a2c

ActorCriticNet::ActorCriticNet(const A2cConfig& cfg, std::uint64_t seed) {
  int in = static_cast<int>(kCellsPerArm) * 4;
  int w = cfg.trunk_width;
  trunk = Mlp({in, w, w}, {Activation::Relu, Activation::Relu}, derive_seed(seed, 11));
  policy = Mlp({w, 4}, {Activation::Softmax}, derive_seed(seed, 12));
  value = Mlp({w, 1}, {Activation::Linear}, derive_seed(seed, 13));
}

std::pair<Eigen::VectorXd, double> ActorCriticNet::evaluate(const CellStateVector& s) const {
  Eigen::VectorXd h = trunk.forward1(cell_state_to_vector(s));
  return {policy.forward1(h), value.forward1(h)(0)};
}

bool ActorCriticNet::same_architecture(const ActorCriticNet& other) const {
  return trunk.same_architecture(other.trunk) && policy.same_architecture(other.policy) &&
         value.same_architecture(other.value);
}

double a2c_advantage(double r, double gamma, double v_next, double v_cur) {
  return r + gamma * v_next - v_cur;
}

void a2c_update(ActorCriticNet& net, const std::vector<Transition>& chunk, const A2cConfig& cfg,
                A2cOptimizer& opt) {
  if (chunk.empty()) throw std::invalid_argument("a2c_update needs a non-empty trajectory");
  const Eigen::Index n = static_cast<Eigen::Index>(chunk.size());
  const Eigen::Index dim = net.trunk.input_size();

  Eigen::MatrixXd s(dim, n), s_next(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.col(i) = cell_state_to_vector(chunk[i].s);
    s_next.col(i) = cell_state_to_vector(chunk[i].s_next);
  }

  ForwardCache trunk_cache, policy_cache, value_cache;
  Eigen::MatrixXd h = net.trunk.forward(s, &trunk_cache);
  Eigen::MatrixXd pi = net.policy.forward(h, &policy_cache);
  Eigen::MatrixXd v = net.value.forward(h, &value_cache);
  Eigen::MatrixXd v_next = net.value.forward(net.trunk.forward(s_next));  // detached bootstrap

  Eigen::VectorXd adv(n);
  for (Eigen::Index i = 0; i < n; ++i)
    adv(i) = a2c_advantage(chunk[i].r, cfg.gamma, v_next(0, i), v(0, i));

  // d/dpi of [-log pi(a) * adv - ent_coef * H(pi)], advantage held constant.
  Eigen::MatrixXd d_pi(4, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j)
      d_pi(j, i) = cfg.entropy_coefficient * (std::log(pi(j, i)) + 1.0);
    d_pi(chunk[i].a, i) -= adv(i) / pi(chunk[i].a, i);
  }
  // d/dv of [value_coef * adv^2] with adv = r + gamma v' - v.
  Eigen::MatrixXd d_v(1, n);
  for (Eigen::Index i = 0; i < n; ++i)
    d_v(0, i) = -2.0 * cfg.value_loss_coefficient * adv(i);

  MlpGradients g_policy, g_value, g_trunk;
  Eigen::MatrixXd dh_policy = net.policy.backward(policy_cache, d_pi, &g_policy);
  Eigen::MatrixXd dh_value = net.value.backward(value_cache, d_v, &g_value);
  net.trunk.backward(trunk_cache, dh_policy + dh_value, &g_trunk);

  opt.policy.step(net.policy, g_policy);
  opt.value.step(net.value, g_value);
  opt.trunk.step(net.trunk, g_trunk);
}

ActorCriticNet a2c_sync(std::vector<ActorCriticNet>& workers) {
  if (workers.empty()) throw std::invalid_argument("a2c_sync needs at least one worker");
  for (const ActorCriticNet& w : workers)
    if (!w.same_architecture(workers.front()))
      throw std::invalid_argument("a2c_sync: architecture mismatch");

  std::vector<Mlp> trunks, policies, values;
  for (const ActorCriticNet& w : workers) {
    trunks.push_back(w.trunk);
    policies.push_back(w.policy);
    values.push_back(w.value);
  }
  ActorCriticNet global;
  global.trunk = average_weights(trunks);
  global.policy = average_weights(policies);
  global.value = average_weights(values);
  for (ActorCriticNet& w : workers) w = global;
  return global;
}

A2cController::A2cController(ActorCriticNet net, A2cConfig cfg)
    : PhasedAgentController(cfg.green_duration, cfg.yellow_duration),
      owned_(std::move(net)),
      net_(&owned_),
      rng_(nullptr) { }

A2cController::A2cController(const ActorCriticNet* net, Rng* rng, A2cConfig cfg)
    : PhasedAgentController(cfg.green_duration, cfg.yellow_duration), net_(net), rng_(rng) { }

int A2cController::decide(const Simulation& sim) {
  auto [pi, v] = net_->evaluate(sim.encode_cell_state());
  (void)v;
  if (rng_) {
    double u = rng_->uniform();
    double cum = 0.0;
    for (int j = 0; j < 4; ++j) {
      cum += pi(j);
      if (u < cum) return j;
    }
    return 3;
  }
  int best = 0;
  for (int j = 1; j < 4; ++j)
    if (pi(j) > pi(best)) best = j;
  return best;
}

A2cTrainResult a2c_train(const A2cConfig& cfg, const SimConfig& sim_cfg, const GenConfig& gen_cfg,
                         std::uint64_t seed, std::ostream* progress) {
  if (cfg.n_workers < 1) throw std::invalid_argument("a2c needs at least one worker");
  A2cTrainResult res;
  ActorCriticNet global(cfg, derive_seed(seed, 1));

  for (int round = 0; round < cfg.rounds; ++round) {
    Scenario scen = scenario_from_int(round % 3 + 1);
    std::vector<ActorCriticNet> workers(static_cast<std::size_t>(cfg.n_workers), global);
    std::vector<double> rewards(static_cast<std::size_t>(cfg.n_workers), 0.0);
    std::vector<double> waits(static_cast<std::size_t>(cfg.n_workers), 0.0);

    // Routes are generated up front so the timed region measures learning only.
    std::vector<RoutePlan> plans;
    plans.reserve(static_cast<std::size_t>(cfg.n_workers));
    for (int w = 0; w < cfg.n_workers; ++w) {
      std::uint64_t tag = static_cast<std::uint64_t>(round) * 64 + static_cast<std::uint64_t>(w);
      GenConfig gen = gen_cfg;
      gen.seed = derive_seed(seed, 10000 + tag);
      plans.push_back(generate_routes(gen, scen));
    }

    auto t0 = std::chrono::steady_clock::now();
    auto run_worker = [&](int w) {
      std::uint64_t tag = static_cast<std::uint64_t>(round) * 64 + static_cast<std::uint64_t>(w);
      Simulation sim(sim_cfg, plans[static_cast<std::size_t>(w)]);

      Rng act_rng(derive_seed(seed, 20000 + tag));
      A2cController ctl(&workers[w], &act_rng, cfg);
      A2cOptimizer opt(cfg.learning_rate);

      std::vector<Transition> chunk;
      TransitionAssembler assembler;
      assembler.emit = [&](const Transition& t) {
        // total_reward stays in raw wait-delta units; only learning sees the
        // scaled copy.
        Transition scaled = t;
        scaled.r *= cfg.reward_scale;
        chunk.push_back(scaled);
        if (static_cast<int>(chunk.size()) >= cfg.update_horizon) {
          a2c_update(workers[w], chunk, cfg, opt);
          chunk.clear();
        }
      };
      ctl.set_decision_hook([&](const CellStateVector& s, int a, const Simulation& sm) {
        assembler.on_decision(s, a, sm);
      });

      drive(sim, ctl, sim_cfg.episode_length);
      assembler.finish(sim);
      if (!chunk.empty()) a2c_update(workers[w], chunk, cfg, opt);  // final partial chunk
      rewards[w] = assembler.total_reward;
      waits[w] = static_cast<double>(sim.cumulative_wait());
    };

    if (cfg.n_workers == 1) {
      run_worker(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(cfg.n_workers);
      for (int w = 0; w < cfg.n_workers; ++w) threads.emplace_back(run_worker, w);
      for (std::thread& t : threads) t.join();
    }

    global = a2c_sync(workers);
    auto t1 = std::chrono::steady_clock::now();
    res.worker_rewards.push_back(rewards);
    res.worker_waits.push_back(waits);
    res.round_wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (progress) {
      *progress << "a2c round " << round << " scenario " << scenario_name(scen) << " rewards";
      for (double r : rewards) *progress << ' ' << r;
      *progress << "\n";
    }
  }

  res.net = global;
  for (double ms : res.round_wall_ms) res.wall_seconds += ms / 1000.0;
  double env_steps = static_cast<double>(cfg.rounds) * cfg.n_workers * sim_cfg.episode_length;
  res.env_steps_per_second = res.wall_seconds > 0.0 ? env_steps / res.wall_seconds : 0.0;
  return res;
}

// ------------------------------------------------------------- a2c model file

namespace {
constexpr char kA2cMagic[4] = {'S', 'B', 'A', 'C'};
constexpr std::uint32_t kA2cVersion = 1;
}  // namespace

void save_a2c(std::ostream& out, const ActorCriticNet& net) {
  out.write(kA2cMagic, 4);
  out.write(reinterpret_cast<const char*>(&kA2cVersion), sizeof(kA2cVersion));
  save_mlp(out, net.trunk);
  save_mlp(out, net.policy);
  save_mlp(out, net.value);
}

ActorCriticNet load_a2c(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || std::string(magic, 4) != std::string(kA2cMagic, 4))
    throw std::runtime_error("not an a2c model file (bad magic)");
  if (version != kA2cVersion) throw std::runtime_error("unsupported a2c model version");
  ActorCriticNet net;
  net.trunk = load_mlp(in);
  net.policy = load_mlp(in);
  net.value = load_mlp(in);
  return net;
}

void save_a2c(const std::filesystem::path& path, const ActorCriticNet& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_a2c(out, net);
}

ActorCriticNet load_a2c(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_a2c(in);
}

}  // namespace signalbench
