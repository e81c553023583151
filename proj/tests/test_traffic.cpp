#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "signalbench/rng.hpp"
#include "signalbench/traffic.hpp"

using namespace signalbench;

namespace {

int idx(Arm s, Arm d) { return Movement{s, d}.index(); }

bool plans_equal(const RoutePlan& a, const RoutePlan& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].spawn_step != b[i].spawn_step) return false;
    if (a[i].movement.index() != b[i].movement.index()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("scenario tables are exact sixteen-thousandths and sum to one") {
  for (Scenario s : {Scenario::Scen1, Scenario::Scen2, Scenario::Scen3}) {
    MovementDistribution d = scenario_probabilities(s);
    long long total = 0;
    for (double p : d.p) {
      double scaled = p * 16000.0;
      long long n = std::llround(scaled);
      CHECK(std::abs(scaled - static_cast<double>(n)) < 1e-9);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      total += n;
    }
    CHECK(total == 16000);
  }
}

TEST_CASE("SCEN-1 column: straights 0.1875, turns 0.03125") {
  MovementDistribution d = scenario_probabilities(Scenario::Scen1);
  for (int i = 0; i < kNumMovements; ++i) {
    Movement m = Movement::from_index(i);
    CHECK(d.p[i] == (m.kind() == Turn::Straight ? 0.1875 : 0.03125));
  }
}

TEST_CASE("SCEN-2 column spot values") {
  MovementDistribution d = scenario_probabilities(Scenario::Scen2);
  CHECK(d.p[idx(Arm::North, Arm::South)] == 0.3375);
  CHECK(d.p[idx(Arm::South, Arm::North)] == 0.3375);
  CHECK(d.p[idx(Arm::East, Arm::West)] == 0.0375);
  CHECK(d.p[idx(Arm::West, Arm::East)] == 0.0375);
  CHECK(d.p[idx(Arm::North, Arm::East)] == 0.05625);
  CHECK(d.p[idx(Arm::North, Arm::West)] == 0.05625);
  CHECK(d.p[idx(Arm::South, Arm::East)] == 0.05625);
  CHECK(d.p[idx(Arm::South, Arm::West)] == 0.05625);
  CHECK(d.p[idx(Arm::East, Arm::North)] == 0.00625);
  CHECK(d.p[idx(Arm::East, Arm::South)] == 0.00625);
  CHECK(d.p[idx(Arm::West, Arm::North)] == 0.00625);
  CHECK(d.p[idx(Arm::West, Arm::South)] == 0.00625);
}

TEST_CASE("SCEN-3 is SCEN-2 with the N/S and E/W roles swapped") {
  MovementDistribution d2 = scenario_probabilities(Scenario::Scen2);
  MovementDistribution d3 = scenario_probabilities(Scenario::Scen3);
  auto swap_axis = [](Arm a) {
    switch (a) {
      case Arm::North: return Arm::East;
      case Arm::East: return Arm::North;
      case Arm::South: return Arm::West;
      case Arm::West: return Arm::South;
    }
    return a;
  };
  for (int i = 0; i < kNumMovements; ++i) {
    Movement m = Movement::from_index(i);
    Movement swapped{swap_axis(m.source), swap_axis(m.destination)};
    CHECK(d3.p[swapped.index()] == d2.p[i]);
  }
}

TEST_CASE("weibull_inverse_cdf closed-form points and domain errors") {
  CHECK(weibull_inverse_cdf(2.0, 0.0) == 0.0);
  CHECK(weibull_inverse_cdf(2.0, 1.0 - std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(weibull_inverse_cdf(1.0, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(weibull_inverse_cdf(2.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(weibull_inverse_cdf(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(weibull_inverse_cdf(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(weibull_inverse_cdf(-2.0, 0.5), std::invalid_argument);
}

TEST_CASE("weibull_inverse_cdf is monotone in u") {
  double prev = -1.0;
  for (int i = 0; i < 1000; ++i) {
    double x = weibull_inverse_cdf(2.0, i / 1000.0);
    CHECK(x > prev);
    prev = x;
  }
}

TEST_CASE("generate_routes honors the contract") {
  GenConfig cfg;
  cfg.seed = 42;
  RoutePlan plan = generate_routes(cfg, Scenario::Scen1);
  REQUIRE(static_cast<int>(plan.size()) == cfg.n_vehicles);
  CHECK(plan.front().spawn_step == 0);
  CHECK(plan.back().spawn_step == cfg.episode_length - 1);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    CHECK(plan[i].spawn_step >= 0);
    CHECK(plan[i].spawn_step < cfg.episode_length);
    if (i > 0) CHECK(plan[i - 1].spawn_step <= plan[i].spawn_step);
    plan[i].movement.kind();  // throws on an invalid pair
  }
}

TEST_CASE("generate_routes determinism and seed sensitivity") {
  GenConfig cfg;
  cfg.seed = 7;
  RoutePlan a = generate_routes(cfg, Scenario::Scen2);
  RoutePlan b = generate_routes(cfg, Scenario::Scen2);
  CHECK(plans_equal(a, b));

  GenConfig other = cfg;
  other.seed = 8;
  RoutePlan c = generate_routes(other, Scenario::Scen2);
  CHECK_FALSE(plans_equal(a, c));
}

TEST_CASE("SCEN-1 straight fraction near 0.75 at n = 10000") {
  GenConfig cfg;
  cfg.n_vehicles = 10000;
  cfg.seed = 11;
  RoutePlan plan = generate_routes(cfg, Scenario::Scen1);
  int straight = 0;
  for (const RouteEntry& e : plan) straight += e.movement.kind() == Turn::Straight ? 1 : 0;
  double frac = static_cast<double>(straight) / static_cast<double>(plan.size());
  CHECK(frac == doctest::Approx(0.75).epsilon(0.04));
  CHECK(std::abs(frac - 0.75) <= 0.03);
}

TEST_CASE("movement frequencies pass chi-square against the scenario distribution (alpha 0.01, df 11)") {
  // Critical value of chi-square with 11 degrees of freedom at 0.01.
  const double critical = 24.725;
  for (Scenario s : {Scenario::Scen1, Scenario::Scen2, Scenario::Scen3}) {
    GenConfig cfg;
    cfg.n_vehicles = 100000;
    cfg.episode_length = 5400;
    cfg.seed = 1234;
    RoutePlan plan = generate_routes(cfg, s);
    std::array<long long, kNumMovements> counts{};
    for (const RouteEntry& e : plan) ++counts[e.movement.index()];
    MovementDistribution d = scenario_probabilities(s);
    double chi2 = 0.0;
    for (int i = 0; i < kNumMovements; ++i) {
      double expect = d.p[i] * cfg.n_vehicles;
      double diff = counts[i] - expect;
      chi2 += diff * diff / expect;
    }
    INFO("scenario ", scenario_name(s), " chi2 ", chi2);
    CHECK(chi2 < critical);
  }
}

TEST_CASE("raw variates pass Kolmogorov-Smirnov against Weibull(2) (alpha 0.01)") {
  // Reproduce the generator's time stream: substream 0 of the master seed.
  const int n = 10000;
  Rng rng(derive_seed(1234, 0));
  std::vector<double> x(n);
  for (double& v : x) v = weibull_inverse_cdf(2.0, rng.uniform());
  std::sort(x.begin(), x.end());
  double d_stat = 0.0;
  for (int i = 0; i < n; ++i) {
    double f = 1.0 - std::exp(-x[i] * x[i]);
    d_stat = std::max(d_stat, std::abs((i + 1.0) / n - f));
    d_stat = std::max(d_stat, std::abs(f - static_cast<double>(i) / n));
  }
  double critical = 1.628 / std::sqrt(static_cast<double>(n));
  INFO("KS statistic ", d_stat, " critical ", critical);
  CHECK(d_stat < critical);
}

TEST_CASE("route csv round trip and validation") {
  GenConfig cfg;
  cfg.n_vehicles = 50;
  cfg.seed = 99;
  RoutePlan plan = generate_routes(cfg, Scenario::Scen3);

  std::stringstream buf;
  write_route_csv(buf, plan);
  std::string text = buf.str();
  CHECK(text.substr(0, text.find('\n')) == "spawn_step,source,destination");

  std::stringstream in(text);
  RoutePlan back = read_route_csv(in);
  CHECK(plans_equal(plan, back));

  std::stringstream bad_header("step,src,dst\n1,N,S\n");
  CHECK_THROWS_AS(read_route_csv(bad_header), std::runtime_error);
  std::stringstream bad_arm("spawn_step,source,destination\n1,N,X\n");
  CHECK_THROWS_AS(read_route_csv(bad_arm), std::exception);
  std::stringstream bad_pair("spawn_step,source,destination\n1,N,N\n");
  CHECK_THROWS_AS(read_route_csv(bad_pair), std::exception);
  std::stringstream bad_step("spawn_step,source,destination\nxx,N,S\n");
  CHECK_THROWS_AS(read_route_csv(bad_step), std::runtime_error);
}

TEST_CASE("scenario_from_int bounds") {
  CHECK(scenario_from_int(1) == Scenario::Scen1);
  CHECK(scenario_from_int(3) == Scenario::Scen3);
  CHECK_THROWS_AS(scenario_from_int(0), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_int(4), std::invalid_argument);
  CHECK(scenario_name(Scenario::Scen2) == "SCEN-2");
}
