#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "stochctm/errors.hpp"
#include "stochctm/highway.hpp"

using namespace stochctm;

TEST_CASE("cumulative ratio") {
  HighwaySpec spec = fixtures::h3().spec;
  spec.mainline_ratio = {0.9, 0.8, 0.0};
  CHECK(cumulative_ratio(spec, 2, 2) == 1.0);
  CHECK(cumulative_ratio(spec, 0, 2) == doctest::Approx(0.72));
  CHECK(cumulative_ratio(fixtures::s2().spec, 0, 1) == 1.0);
  CHECK_THROWS_AS(cumulative_ratio(spec, 2, 1), ArgumentError);
  CHECK_THROWS_AS(cumulative_ratio(spec, 0, 3), ArgumentError);
}

TEST_CASE("sending and receiving flows") {
  const CellParams c = fixtures::cell(100, 4000, 0, 20, 240);
  CHECK(sending_flow(c, 4000, 20) == 2000);
  CHECK(sending_flow(c, 4000, 0) == 0);
  CHECK(sending_flow(c, 2000, 100) == 2000);
  CHECK(receiving_flow(c, 240) == 0);
  CHECK(receiving_flow(c, 40) == 4000);
  CHECK(receiving_flow(c, 140) == 2000);
  CHECK_THROWS_AS(sending_flow(c, 4000, -1), ArgumentError);
  CHECK_THROWS_AS(receiving_flow(c, 241), ArgumentError);
}

TEST_CASE("buffer demand") {
  HighwaySpec spec = fixtures::s2().spec;
  spec.buffer_capacity = {4000, 2000};
  const ControlConfig u = fixtures::config({5000, 400}, {1, 0});
  CHECK(buffer_demand(spec, u, 1, 0.0) == 400);
  CHECK(buffer_demand(spec, u, 1, 50.0) == 2000);
  CHECK(buffer_demand(spec, u, 0, 0.0) == 4000);
  CHECK_THROWS_AS(buffer_demand(spec, u, 2, 0.0), ArgumentError);
}

TEST_CASE("merge flows and vector field on S2") {
  const auto s = fixtures::s2();
  const std::vector<double> mode0 = s.model.capacity[0];
  HybridState x{0, {0, 50}, {40, 140}};

  SUBCASE("mainline priority at ramp 2") {
    const auto u = fixtures::config({2600, 400}, {1, 0});
    const FlowSnapshot fl = merge_flows(s.spec, mode0, u, x);
    CHECK(fl.sending[0] == 4000);
    CHECK(fl.receiving[1] == 2000);
    CHECK(fl.cell_flow[0] == 2000);
    CHECK(fl.ramp_flow[1] == 0);
    const VectorField g = vector_field(s.spec, u, fl);
    CHECK(g.queue_rate[1] == 400);
    CHECK(fl.cell_flow[1] == 4000);
    CHECK(g.density_rate[1] == -2000);
  }
  SUBCASE("ramp priority at ramp 2") {
    const auto u = fixtures::config({2600, 400}, {1, 1});
    const FlowSnapshot fl = merge_flows(s.spec, mode0, u, x);
    CHECK(fl.buffer_demand[1] == 2000);
    CHECK(fl.ramp_flow[1] == 2000);
    CHECK(fl.cell_flow[0] == 0);
  }
  SUBCASE("jammed receiving cell admits nothing") {
    for (int w : {0, 1}) {
      const auto u = fixtures::config({2600, 400}, {1, w});
      HybridState jam{0, {0, 50}, {40, 240}};
      const FlowSnapshot fl = merge_flows(s.spec, mode0, u, jam);
      CHECK(fl.cell_flow[0] == 0);
      CHECK(fl.ramp_flow[1] == 0);
    }
  }
  SUBCASE("empty system at rest") {
    const auto u = fixtures::config({0, 0}, {1, 1});
    HybridState zero{0, {0, 0}, {0, 0}};
    const VectorField g = vector_field(s.spec, mode0, u, zero);
    CHECK(g.queue_rate == std::vector<double>{0, 0});
    CHECK(g.density_rate == std::vector<double>{0, 0});
  }
}

TEST_CASE("steady state") {
  CHECK(steady_state(fixtures::example1().model)[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  MarkovCapacityModel two{{{1, 1}, {1, 1}}, {{0, 2}, {6, 0}}, {}};
  const auto p = steady_state(two);
  CHECK(p[0] == doctest::Approx(0.75));
  CHECK(p[1] == doctest::Approx(0.25));
  MarkovCapacityModel one{{{1}}, {{0}}, {}};
  CHECK(steady_state(one) == std::vector<double>{1.0});
  MarkovCapacityModel reducible{{{1}, {1}}, {{0, 1}, {0, 0}}, {}};
  CHECK_THROWS_AS(steady_state(reducible), ModelError);
}

TEST_CASE("steady state solves the balance equations") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rate(0.1, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 6;
    MarkovCapacityModel m;
    m.capacity.assign(n, {1.0});
    m.rates.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) m.rates[i][j] = rate(rng);
      }
    }
    const auto p = steady_state(m);
    double sum = 0.0;
    for (double x : p) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t j = 0; j < n; ++j) {
      double flow = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != j) flow += p[i] * m.rates[i][j] - p[j] * m.rates[j][i];
      }
      CHECK(std::abs(flow) <= 1e-9);
    }
  }
}

TEST_CASE("validation report") {
  const auto s = fixtures::s2(2600, 400);
  const auto u = fixtures::config({2600, 400}, {1, 0});
  CHECK(validate(s.spec, s.model, &u).empty());

  auto bad = s;
  bad.spec.mainline_ratio[1] = 0.5;
  auto report = validate(bad.spec, bad.model);
  REQUIRE(report.size() == 1);
  CHECK(report[0] == "mainline_ratio: terminal ratio must be zero");

  bad = s;
  bad.spec.cells[0].capacity_drop = 5000;
  CHECK_FALSE(validate(bad.spec, bad.model).empty());

  bad = s;
  bad.model.capacity[1][1] = 2500;
  CHECK_FALSE(validate(bad.spec, bad.model).empty());

  bad = s;
  bad.model.rates = {{0, 1}, {0, 0}};
  CHECK_FALSE(validate(bad.spec, bad.model).empty());

  const auto over = fixtures::config({3000, 400}, {1, 0});
  CHECK_FALSE(validate(s.spec, s.model, &over).empty());
}

TEST_CASE("flow invariants on random states") {
  const auto s = fixtures::h3();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t K = s.spec.size();
    HybridState x;
    x.mode = trial % 2;
    ControlConfig u;
    for (std::size_t k = 0; k < K; ++k) {
      x.queue.push_back(unit(rng) < 0.5 ? 0.0 : 100.0 * unit(rng));
      double n = unit(rng) * s.spec.cells[k].jam_density;
      const double edge = unit(rng);
      if (edge < 0.1) n = 0.0;
      if (edge > 0.9) n = s.spec.cells[k].jam_density;
      x.density.push_back(n);
      u.inflow.push_back(3000.0 * unit(rng));
      u.metering_off.push_back(unit(rng) < 0.5 ? 0 : 1);
    }
    const auto& cap = s.model.capacity[x.mode];
    const FlowSnapshot fl = merge_flows(s.spec, cap, u, x);
    const VectorField g = vector_field(s.spec, u, fl);
    for (std::size_t k = 0; k < K; ++k) {
      CHECK(fl.cell_flow[k] >= 0.0);
      CHECK(fl.cell_flow[k] <= std::min(fl.sending[k], cap[k]) + 1e-9);
      CHECK(fl.ramp_flow[k] >= 0.0);
      CHECK(fl.ramp_flow[k] <= fl.buffer_demand[k] + 1e-9);
      const double inflow = (k > 0 ? s.spec.mainline_ratio[k - 1] * fl.cell_flow[k - 1] : 0.0) +
                            fl.ramp_flow[k];
      CHECK(inflow <= fl.receiving[k] + 1e-9);
      if (x.density[k] == 0.0) CHECK(g.density_rate[k] >= -1e-9);
      if (x.density[k] == s.spec.cells[k].jam_density) CHECK(g.density_rate[k] <= 1e-9);
      CHECK(g.queue_rate[k] >= u.inflow[k] - s.spec.buffer_capacity[k] - 1e-9);
      if (fl.receiving[k] == 0.0) CHECK(g.queue_rate[k] >= 0.0);
    }
  }
}
