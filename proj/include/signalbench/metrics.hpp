#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "signalbench/traffic.hpp"

namespace signalbench {

struct StepRecord {
  int step = 0;
  int total_queue = 0;
  std::array<int, 4> queue{};  // N, E, S, W
  std::int64_t cum_wait = 0;
  std::string phase;  // "G:N", "Y:E", ...
};

struct EpisodeLog {
  std::string controller;
  Scenario scenario = Scenario::Scen1;
  std::uint64_t seed = 0;
  std::vector<StepRecord> records;
};

struct SummaryRow {
  std::string controller;
  Scenario scenario = Scenario::Scen1;
  double peak_queue = 0.0;
  double fraction_above_half = 0.0;
  double total_wait = 0.0;
};

// Shortest round-trippable decimal, 12 significant digits (%.12g); the one
// representation every CSV written here uses for real values.
std::string format_real(double v);

// Max over steps of the total queue.
int peak_queue(const EpisodeLog& log);

// Share of steps whose total queue exceeds half this run's peak; a run with
// peak 0 (no traffic) scores 0.
double fraction_above_half(const EpisodeLog& log);

// Final cumulative wait (queued vehicle-steps over the whole episode).
std::int64_t total_wait(const EpisodeLog& log);

// One row per (controller, scenario) in first-appearance order; metrics are
// averaged arithmetically across the logs (seeds) sharing the pair.
std::vector<SummaryRow> summarize(const std::vector<EpisodeLog>& logs);

// Step-log CSV: step,total_queue,queue_N,queue_E,queue_S,queue_W,cum_wait,phase
void write_step_csv(std::ostream& out, const EpisodeLog& log);
void write_step_csv(const std::filesystem::path& path, const EpisodeLog& log);
EpisodeLog read_step_csv(std::istream& in);
EpisodeLog read_step_csv(const std::filesystem::path& path);

// Summary CSV: controller,scenario,peak_queue,fraction_above_half,total_wait
// Reals carry 12 significant digits.
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(std::istream& in);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

}  // namespace signalbench
