#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "signalbench/metrics.hpp"
#include "signalbench/runner.hpp"

using namespace signalbench;

namespace {

EpisodeLog log_from_series(const std::vector<int>& totals, const std::string& controller = "rr",
                           Scenario scen = Scenario::Scen1) {
  EpisodeLog log;
  log.controller = controller;
  log.scenario = scen;
  std::int64_t wait = 0;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    StepRecord r;
    r.step = static_cast<int>(i);
    r.total_queue = totals[i];
    r.queue = {totals[i], 0, 0, 0};
    wait += totals[i];
    r.cum_wait = wait;
    r.phase = "G:N";
    log.records.push_back(r);
  }
  return log;
}

}  // namespace

TEST_CASE("peak_queue basics") {
  CHECK(peak_queue(log_from_series({0, 3, 7, 2})) == 7);
  CHECK(peak_queue(log_from_series({0, 0, 0})) == 0);
  CHECK_THROWS_AS(peak_queue(EpisodeLog{}), std::invalid_argument);
}

TEST_CASE("fraction_above_half definitions and edge cases") {
  CHECK(fraction_above_half(log_from_series({2, 2, 2, 2})) == 1.0);
  CHECK(fraction_above_half(log_from_series({4, 1, 1, 1})) == 0.25);
  CHECK(fraction_above_half(log_from_series({0, 0, 0, 0})) == 0.0);  // peak 0 -> 0
  // Strictly greater than half: a value equal to half does not count.
  CHECK(fraction_above_half(log_from_series({4, 2, 2, 2})) == 0.25);
  double f = fraction_above_half(log_from_series({10, 6, 5, 4, 1}));
  CHECK(f == doctest::Approx(0.4));  // 10 and 6 exceed 5
  CHECK_THROWS_AS(fraction_above_half(EpisodeLog{}), std::invalid_argument);
}

TEST_CASE("total_wait is the final cumulative value and prefixes are monotone") {
  EpisodeLog log = log_from_series({1, 0, 2, 1});
  CHECK(total_wait(log) == 4);
  std::int64_t prev = 0;
  for (const StepRecord& r : log.records) {
    CHECK(r.cum_wait >= prev);
    prev = r.cum_wait;
  }
  EpisodeLog empty_traffic = log_from_series({0, 0, 0});
  CHECK(total_wait(empty_traffic) == 0);
  CHECK_THROWS_AS(total_wait(EpisodeLog{}), std::invalid_argument);
}

TEST_CASE("metrics depend on totals only, not the per-arm split") {
  EpisodeLog a = log_from_series({3, 5, 2});
  EpisodeLog b = a;
  for (StepRecord& r : b.records) {
    std::rotate(r.queue.begin(), r.queue.begin() + 1, r.queue.end());
  }
  CHECK(peak_queue(a) == peak_queue(b));
  CHECK(fraction_above_half(a) == fraction_above_half(b));
}

TEST_CASE("summarize groups by (controller, scenario) and averages seeds") {
  std::vector<EpisodeLog> logs;
  for (const char* ctl : {"rr", "monopoly", "dqn", "a2c"})
    for (int s = 1; s <= 3; ++s)
      logs.push_back(log_from_series({1, 2, 3}, ctl, scenario_from_int(s)));
  std::vector<SummaryRow> rows = summarize(logs);
  REQUIRE(rows.size() == 12);  // 4 controllers x 3 scenarios
  CHECK(rows[0].controller == "rr");
  CHECK(rows[0].scenario == Scenario::Scen1);
  CHECK(rows[11].controller == "a2c");
  CHECK(rows[11].scenario == Scenario::Scen3);

  EpisodeLog seed_a = log_from_series({80, 0}, "rr", Scenario::Scen2);
  EpisodeLog seed_b = log_from_series({90, 0}, "rr", Scenario::Scen2);
  std::vector<SummaryRow> mean = summarize({seed_a, seed_b});
  REQUIRE(mean.size() == 1);
  CHECK(mean[0].peak_queue == 85.0);
  CHECK(mean[0].total_wait == 85.0);

  std::vector<SummaryRow> single = summarize({seed_a});
  CHECK(single[0].peak_queue == 80.0);
  CHECK(single[0].fraction_above_half == fraction_above_half(seed_a));
}

TEST_CASE("step csv: shape, round trip") {
  EpisodeLog log = log_from_series({0, 1, 2, 1, 0});
  std::stringstream buf;
  write_step_csv(buf, log);
  std::string text = buf.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);  // header + 5 rows
  CHECK(text.rfind("step,total_queue,queue_N,queue_E,queue_S,queue_W,cum_wait,phase\n", 0) == 0);

  std::stringstream in(text);
  EpisodeLog back = read_step_csv(in);
  REQUIRE(back.records.size() == log.records.size());
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    CHECK(back.records[i].step == log.records[i].step);
    CHECK(back.records[i].total_queue == log.records[i].total_queue);
    CHECK(back.records[i].queue == log.records[i].queue);
    CHECK(back.records[i].cum_wait == log.records[i].cum_wait);
    CHECK(back.records[i].phase == log.records[i].phase);
  }

  std::stringstream bad("nope\n1,2\n");
  CHECK_THROWS_AS(read_step_csv(bad), std::runtime_error);
}

TEST_CASE("summary csv: shape, 12-significant-digit round trip") {
  std::vector<SummaryRow> rows;
  for (int s = 1; s <= 3; ++s)
    for (const char* ctl : {"rr", "monopoly", "dqn", "a2c"}) {
      SummaryRow r;
      r.controller = ctl;
      r.scenario = scenario_from_int(s);
      r.peak_queue = 88.0 + s;
      r.fraction_above_half = 0.123456789012 + s * 0.001;
      r.total_wait = 123456.789 + s;
      rows.push_back(r);
    }
  REQUIRE(rows.size() == 12);

  std::stringstream buf;
  write_summary_csv(buf, rows);
  std::string text = buf.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 13);

  std::stringstream in(text);
  std::vector<SummaryRow> back = read_summary_csv(in);
  REQUIRE(back.size() == 12);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].controller == rows[i].controller);
    CHECK(back[i].scenario == rows[i].scenario);
    CHECK(back[i].peak_queue == doctest::Approx(rows[i].peak_queue).epsilon(1e-11));
    CHECK(back[i].fraction_above_half ==
          doctest::Approx(rows[i].fraction_above_half).epsilon(1e-11));
    CHECK(back[i].total_wait == doctest::Approx(rows[i].total_wait).epsilon(1e-11));
  }
}

TEST_CASE("run_episode produces a full, consistent log") {
  GenConfig gen;
  gen.n_vehicles = 300;
  gen.episode_length = 1200;
  gen.seed = 17;
  RoutePlan plan = generate_routes(gen, Scenario::Scen1);

  SimConfig sim_cfg;
  sim_cfg.episode_length = 1200;
  RoundRobinController ctl;
  EpisodeLog log = run_episode(sim_cfg, plan, ctl, Scenario::Scen1, 17);

  CHECK(log.controller == "rr");
  REQUIRE(log.records.size() == 1200);
  std::int64_t prev_wait = 0;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const StepRecord& r = log.records[i];
    CHECK(r.step == static_cast<int>(i));
    CHECK(r.total_queue == r.queue[0] + r.queue[1] + r.queue[2] + r.queue[3]);
    CHECK(r.cum_wait >= prev_wait);
    prev_wait = r.cum_wait;
    CHECK((r.phase[0] == 'G' || r.phase[0] == 'Y'));
  }
  CHECK(peak_queue(log) > 0);
  CHECK(total_wait(log) > 0);

  // Determinism end to end: same plan, fresh controller, identical bytes.
  RoundRobinController ctl2;
  EpisodeLog again = run_episode(sim_cfg, plan, ctl2, Scenario::Scen1, 17);
  std::stringstream s1, s2;
  write_step_csv(s1, log);
  write_step_csv(s2, again);
  CHECK(s1.str() == s2.str());
}
