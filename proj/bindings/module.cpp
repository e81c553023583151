#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>
#include <sstream>

#include "signalbench/bench.hpp"
#include "signalbench/runner.hpp"

namespace py = pybind11;
using namespace signalbench;

PYBIND11_MODULE(_core, m) {
  m.doc() = "signalbench core: intersection simulation, controllers, metrics, bench runners";
  m.attr("__version__") = "0.1.0";

  py::register_exception<UsageError>(m, "UsageError");

  // ------------------------------------------------------------------- types
  py::enum_<Arm>(m, "Arm")
      .value("NORTH", Arm::North)
      .value("EAST", Arm::East)
      .value("SOUTH", Arm::South)
      .value("WEST", Arm::West);

  py::enum_<Scenario>(m, "Scenario")
      .value("SCEN1", Scenario::Scen1)
      .value("SCEN2", Scenario::Scen2)
      .value("SCEN3", Scenario::Scen3);

  py::enum_<PhaseKind>(m, "PhaseKind")
      .value("GREEN", PhaseKind::Green)
      .value("YELLOW", PhaseKind::Yellow);

  py::class_<Movement>(m, "Movement")
      .def(py::init([](Arm src, Arm dst) { return Movement{src, dst}; }), py::arg("source"),
           py::arg("destination"))
      .def_readwrite("source", &Movement::source)
      .def_readwrite("destination", &Movement::destination)
      .def_property_readonly("index", &Movement::index)
      .def_static("from_index", &Movement::from_index)
      .def("__eq__", [](const Movement& a, const Movement& b) { return a == b; })
      .def("__repr__", [](const Movement& mv) {
        return std::string("Movement(") + arm_letter(mv.source) + "->" +
               arm_letter(mv.destination) + ")";
      });

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("road_length", &SimConfig::road_length)
      .def_readwrite("free_speed", &SimConfig::free_speed)
      .def_readwrite("vehicle_space", &SimConfig::vehicle_space)
      .def_readwrite("saturation_headway", &SimConfig::saturation_headway)
      .def_readwrite("yellow_duration", &SimConfig::yellow_duration)
      .def_readwrite("step_duration", &SimConfig::step_duration)
      .def_readwrite("episode_length", &SimConfig::episode_length)
      .def("queue_capacity", &SimConfig::queue_capacity);

  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("n_vehicles", &GenConfig::n_vehicles)
      .def_readwrite("episode_length", &GenConfig::episode_length)
      .def_readwrite("weibull_shape", &GenConfig::weibull_shape)
      .def_readwrite("seed", &GenConfig::seed);

  py::class_<RrConfig>(m, "RrConfig")
      .def(py::init<>())
      .def_readwrite("green_quantum", &RrConfig::green_quantum)
      .def_readwrite("yellow_quantum", &RrConfig::yellow_quantum);

  py::class_<MonopolyConfig>(m, "MonopolyConfig")
      .def(py::init<>())
      .def_readwrite("min_time", &MonopolyConfig::min_time)
      .def_readwrite("max_time", &MonopolyConfig::max_time)
      .def_readwrite("time_step", &MonopolyConfig::time_step)
      .def_readwrite("yellow_quantum", &MonopolyConfig::yellow_quantum);

  py::class_<DqnConfig>(m, "DqnConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &DqnConfig::gamma)
      .def_readwrite("learning_rate", &DqnConfig::learning_rate)
      .def_readwrite("green_duration", &DqnConfig::green_duration)
      .def_readwrite("yellow_duration", &DqnConfig::yellow_duration)
      .def_readwrite("episodes", &DqnConfig::episodes)
      .def_readwrite("replay_samples_per_episode", &DqnConfig::replay_samples_per_episode)
      .def_readwrite("replay_capacity", &DqnConfig::replay_capacity)
      .def_readwrite("batch_size", &DqnConfig::batch_size)
      .def_readwrite("min_replay_before_training", &DqnConfig::min_replay_before_training)
      .def_readwrite("hidden_layers", &DqnConfig::hidden_layers)
      .def_readwrite("hidden_width", &DqnConfig::hidden_width);

  py::class_<A2cConfig>(m, "A2cConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &A2cConfig::gamma)
      .def_readwrite("learning_rate", &A2cConfig::learning_rate)
      .def_readwrite("n_workers", &A2cConfig::n_workers)
      .def_readwrite("entropy_coefficient", &A2cConfig::entropy_coefficient)
      .def_readwrite("value_loss_coefficient", &A2cConfig::value_loss_coefficient)
      .def_readwrite("update_horizon", &A2cConfig::update_horizon)
      .def_readwrite("green_duration", &A2cConfig::green_duration)
      .def_readwrite("yellow_duration", &A2cConfig::yellow_duration)
      .def_readwrite("rounds", &A2cConfig::rounds)
      .def_readwrite("trunk_width", &A2cConfig::trunk_width)
      .def_readwrite("reward_scale", &A2cConfig::reward_scale);

  py::class_<RouteEntry>(m, "RouteEntry")
      .def(py::init<>())
      .def_readwrite("spawn_step", &RouteEntry::spawn_step)
      .def_readwrite("movement", &RouteEntry::movement)
      .def("__repr__", [](const RouteEntry& e) {
        std::ostringstream out;
        out << "RouteEntry(step=" << e.spawn_step << ", " << arm_letter(e.movement.source) << "->"
            << arm_letter(e.movement.destination) << ")";
        return out.str();
      });

  py::class_<Phase>(m, "Phase")
      .def_readonly("kind", &Phase::kind)
      .def_readonly("arm", &Phase::arm)
      .def_readonly("remaining", &Phase::remaining);

  py::class_<PhaseDirective>(m, "PhaseDirective")
      .def_readwrite("kind", &PhaseDirective::kind)
      .def_readwrite("arm", &PhaseDirective::arm)
      .def_readwrite("duration", &PhaseDirective::duration);

  m.def("green", &green, py::arg("arm"), py::arg("duration"));
  m.def("yellow", &yellow, py::arg("arm"), py::arg("duration"));

  py::class_<StepEvents>(m, "StepEvents")
      .def_readonly("spawned", &StepEvents::spawned)
      .def_readonly("departed", &StepEvents::departed)
      .def_readonly("phase", &StepEvents::phase);

  // -------------------------------------------------------------- simulation
  py::class_<Simulation>(m, "Simulation")
      .def(py::init<SimConfig, RoutePlan>(), py::arg("config"), py::arg("routes"))
      .def("step", &Simulation::step, py::arg("directive") = std::nullopt)
      .def("queue_length", &Simulation::queue_length)
      .def("total_queue", &Simulation::total_queue)
      .def("queue_length_meters", &Simulation::queue_length_meters)
      .def("average_speed", &Simulation::average_speed)
      .def("cumulative_wait", &Simulation::cumulative_wait)
      .def("encode_cell_state", &Simulation::encode_cell_state)
      .def("step_count", &Simulation::step_count)
      .def("phase", &Simulation::phase)
      .def("spawned_total", &Simulation::spawned_total)
      .def("departed_total", &Simulation::departed_total)
      .def("on_network", &Simulation::on_network);

  // ----------------------------------------------------------------- traffic
  m.def("scenario_from_int", &scenario_from_int);
  m.def("scenario_name", &scenario_name);
  m.def(
      "scenario_probabilities",
      [](Scenario s) {
        MovementDistribution d = scenario_probabilities(s);
        return std::vector<double>(d.p.begin(), d.p.end());
      },
      "Per-movement spawn probabilities, indexed by Movement.index");
  m.def("weibull_inverse_cdf", &weibull_inverse_cdf, py::arg("shape"), py::arg("u"));
  m.def("generate_routes", &generate_routes, py::arg("config"), py::arg("scenario"));
  m.def("write_route_csv",
        py::overload_cast<const std::filesystem::path&, const RoutePlan&>(&write_route_csv));
  m.def("read_route_csv", py::overload_cast<const std::filesystem::path&>(&read_route_csv));

  // ----------------------------------------------------------------- metrics
  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("step", &StepRecord::step)
      .def_readonly("total_queue", &StepRecord::total_queue)
      .def_readonly("queue", &StepRecord::queue)
      .def_readonly("cum_wait", &StepRecord::cum_wait)
      .def_readonly("phase", &StepRecord::phase);

  py::class_<EpisodeLog>(m, "EpisodeLog")
      .def_readonly("controller", &EpisodeLog::controller)
      .def_readonly("scenario", &EpisodeLog::scenario)
      .def_readonly("seed", &EpisodeLog::seed)
      .def_readonly("records", &EpisodeLog::records);

  py::class_<SummaryRow>(m, "SummaryRow")
      .def_readonly("controller", &SummaryRow::controller)
      .def_readonly("scenario", &SummaryRow::scenario)
      .def_readonly("peak_queue", &SummaryRow::peak_queue)
      .def_readonly("fraction_above_half", &SummaryRow::fraction_above_half)
      .def_readonly("total_wait", &SummaryRow::total_wait)
      .def("__repr__", [](const SummaryRow& r) {
        std::ostringstream out;
        out << "SummaryRow(" << r.controller << ", " << scenario_name(r.scenario)
            << ", peak=" << r.peak_queue << ", frac=" << r.fraction_above_half
            << ", wait=" << r.total_wait << ")";
        return out.str();
      });

  m.def("peak_queue", &peak_queue);
  m.def("fraction_above_half", &fraction_above_half);
  m.def("total_wait", &total_wait);
  m.def("summarize", &summarize);
  m.def("write_step_csv",
        py::overload_cast<const std::filesystem::path&, const EpisodeLog&>(&write_step_csv));
  m.def("read_step_csv", py::overload_cast<const std::filesystem::path&>(&read_step_csv));
  m.def("write_summary_csv", py::overload_cast<const std::filesystem::path&,
                                               const std::vector<SummaryRow>&>(&write_summary_csv));
  m.def("read_summary_csv", py::overload_cast<const std::filesystem::path&>(&read_summary_csv));

  // ------------------------------------------------------------------- bench
  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("mode", &RunConfig::mode)
      .def_readwrite("controller", &RunConfig::controller)
      .def_readwrite("scenario", &RunConfig::scenario)
      .def_readwrite("seeds", &RunConfig::seeds)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_readwrite("model_path", &RunConfig::model_path)
      .def_readwrite("episodes", &RunConfig::episodes)
      .def_readwrite("rounds", &RunConfig::rounds)
      .def_readwrite("n_workers", &RunConfig::n_workers)
      .def_readwrite("workers_list", &RunConfig::workers_list)
      .def_readwrite("sim", &RunConfig::sim)
      .def_readwrite("gen", &RunConfig::gen)
      .def_readwrite("rr", &RunConfig::rr)
      .def_readwrite("monopoly", &RunConfig::monopoly)
      .def_readwrite("dqn", &RunConfig::dqn)
      .def_readwrite("a2c", &RunConfig::a2c);

  py::class_<EvalOutputs>(m, "EvalOutputs")
      .def_readonly("step_files", &EvalOutputs::step_files)
      .def_readonly("summary_file", &EvalOutputs::summary_file)
      .def_readonly("summary", &EvalOutputs::summary);

  py::class_<TrainOutputs>(m, "TrainOutputs")
      .def_readonly("curve_file", &TrainOutputs::curve_file)
      .def_readonly("model_file", &TrainOutputs::model_file)
      .def_readonly("throughput_file", &TrainOutputs::throughput_file);

  m.def("load_config", &load_config);
  m.def("apply_override", &apply_override);
  m.def("expand_scenarios", &expand_scenarios);
  m.def("eval_episode", &eval_episode, py::arg("config"), py::arg("scenario"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_eval", &run_eval, py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_train",
      [](const RunConfig& cfg, bool verbose) {
        py::gil_scoped_release release;
        return run_train(cfg, verbose ? &std::clog : nullptr);
      },
      py::arg("config"), py::arg("verbose") = false);
  m.def(
      "run_scaling",
      [](const RunConfig& cfg, bool verbose) {
        py::gil_scoped_release release;
        return run_scaling(cfg, verbose ? &std::clog : nullptr);
      },
      py::arg("config"), py::arg("verbose") = false);
}
