#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "stochctm/errors.hpp"
#include "stochctm/invariant_set.hpp"

using namespace stochctm;

TEST_CASE("upper densities and lower densities on S2") {
  const auto s = fixtures::s2();
  const auto b = compute_bounds(s.spec, s.model, fixtures::config({2600, 400}, {1, 1}));
  CHECK(b.n_upper[0] == doctest::Approx(40.0));
  CHECK(b.n_upper[1] == doctest::Approx(140.0));
  CHECK(b.q_upper[0] == 0.0);
  CHECK(b.q_upper[1] == 0.0);
  const std::vector<char> empty{0, 0};
  const auto low = b.n_lower(empty);
  CHECK(low[0] == doctest::Approx(26.0));
  CHECK(low[1] == doctest::Approx(30.0));
  CHECK(b.m1_empty());
  CHECK(vertex_set(b).empty());
}

TEST_CASE("metered ramp may queue; vertex set of S2") {
  const auto s = fixtures::s2();
  const auto b = compute_bounds(s.spec, s.model, fixtures::config({2600, 400}, {1, 0}));
  CHECK(b.q_upper[0] == 0.0);
  CHECK(b.q_upper[1] == kInfinity);
  CHECK(b.q_lower[1] == 0.0);
  const std::vector<char> queued{0, 1};
  const auto low = b.n_lower(queued);
  CHECK(low[0] == doctest::Approx(26.0));
  CHECK(low[1] == doctest::Approx(40.0));

  const VertexSet vs = vertex_set(b);
  REQUIRE(vs.size() == 4);
  for (const Vertex& v : vs.vertices) {
    CHECK(v.backlogged == queued);
    CHECK((v.density[0] == doctest::Approx(26.0) || v.density[0] == doctest::Approx(40.0)));
    CHECK((v.density[1] == doctest::Approx(40.0) || v.density[1] == doctest::Approx(140.0)));
  }
}

TEST_CASE("overloaded buffer forces a backlog") {
  const auto s = fixtures::s2();
  const auto b = compute_bounds(s.spec, s.model, fixtures::config({4500, 0}, {0, 0}), false);
  CHECK(b.q_lower[0] == kInfinity);
  CHECK(b.q_upper[0] == kInfinity);
  HybridState empty{0, {0.0, 0.0}, {30.0, 100.0}};
  CHECK_FALSE(contains(b, empty));
}

TEST_CASE("unmetered ramp that would queue is rejected") {
  const auto s = fixtures::s2();
  CHECK_THROWS_AS(compute_bounds(s.spec, s.model, fixtures::config({2600, 2500}, {1, 1})),
                  ScenarioError);
  CHECK_NOTHROW(compute_bounds(s.spec, s.model, fixtures::config({2600, 2500}, {1, 1}), false));
}

TEST_CASE("membership") {
  const auto s = fixtures::s2();
  const auto b = compute_bounds(s.spec, s.model, fixtures::config({2600, 400}, {1, 0}));
  CHECK(contains(b, HybridState{0, {0.0, 0.0}, {30.0, 100.0}}));
  CHECK(contains(b, HybridState{1, {0.0, 5.0}, {40.0, 40.0}}));
  CHECK_FALSE(contains(b, HybridState{0, {1.0, 0.0}, {30.0, 100.0}}));
  CHECK_FALSE(contains(b, HybridState{0, {0.0, 0.0}, {20.0, 100.0}}));
  CHECK_FALSE(contains(b, HybridState{0, {0.0, 0.0}, {30.0, 150.0}}));
  CHECK(contains(b, HybridState{0, {0.0, 0.0}, {30.0, 140.5}}, 1.0));
}

TEST_CASE("vertex set properties on random hotspot configs") {
  const auto s = fixtures::h3();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ControlConfig c{{u(rng) * 4000, u(rng) * 1500, u(rng) * 1500},
                    {1, static_cast<int>(rng() & 1U), static_cast<int>(rng() & 1U)}};
    InvariantBounds b = compute_bounds(s.spec, s.model, c, false);
    const VertexSet vs = vertex_set(b);
    CHECK(vs.size() <= 7 * 8);
    for (const Vertex& v : vs.vertices) {
      bool any = false;
      for (std::size_t k = 0; k < 3; ++k) {
        any = any || v.backlogged[k];
        if (v.backlogged[k]) CHECK(b.q_upper[k] == kInfinity);
        CHECK(v.density[k] <= b.n_upper[k] + 1e-12);
        CHECK(v.density[k] >= 0.0);
      }
      CHECK(any);
    }
    // A backlog can only raise the guaranteed density.
    for (unsigned mask = 0; mask < 8; ++mask) {
      std::vector<char> theta{char(mask & 1U), char((mask >> 1) & 1U), char((mask >> 2) & 1U)};
      const auto base = b.n_lower(theta);
      for (std::size_t k = 0; k < 3; ++k) {
        if (theta[k] || c.inflow[k] > s.spec.buffer_capacity[k]) continue;
        auto raised = theta;
        raised[k] = 1;
        const auto up = b.n_lower(raised);
        for (std::size_t j = 0; j < 3; ++j) CHECK(up[j] >= base[j] - 1e-12);
      }
    }
  }
}
