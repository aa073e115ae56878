#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "stochctm/errors.hpp"
#include "stochctm/optimizer.hpp"

using namespace stochctm;

namespace {

bool has_offset_terms(const LinearProgram& lp, const MilpLayout& lay) {
  for (const auto& row : lp.rows) {
    for (std::size_t i = 0; i < lay.modes; ++i) {
      for (std::size_t h = 0; h < lay.cells; ++h) {
        if (row[lay.b(i, h)] != 0.0) return true;
      }
    }
  }
  return false;
}

}  // namespace

TEST_CASE("block enumeration") {
  const auto blocks = milp_blocks(2, 2);
  CHECK(blocks.size() == 24);
  for (const auto& b : blocks) CHECK((b.y[0] == 1 || b.y[1] == 1));
  CHECK(milp_blocks(3, 2).size() == 2 * 7 * 8);
  CHECK(drift_rows_dropped({0, {0, 1}, {0, 0}}, {1, 1}));
  CHECK_FALSE(drift_rows_dropped({0, {0, 1}, {0, 0}}, {1, 0}));
}

TEST_CASE("fixed-binaries LP construction") {
  const auto s = fixtures::s2();
  const Matrix A = build_A(s.spec, AKind::uniform);
  MilpLayout lay;
  const LinearProgram open = build_milp(s.spec, s.model, A, {1, 1}, {0, 0}, {}, &lay);
  CHECK(lay.blocks.size() == 24);
  CHECK(open.num_vars() == 2 + 2 * 2 + 24 * 4);
  CHECK_FALSE(has_offset_terms(open, lay));
  const LinearProgram metered = build_milp(s.spec, s.model, A, {1, 0}, {0, 0}, {}, &lay);
  CHECK(has_offset_terms(metered, lay));
  CHECK(metered.num_rows() == open.num_rows() + 8 * 2);
  CHECK_THROWS_AS(build_milp(s.spec, s.model, A, {1}, {0, 0}), ArgumentError);

  // The full LP and the lazily generated one agree.
  for (const std::vector<int>& w : {std::vector<int>{1, 0}, std::vector<int>{1, 1}}) {
    MilpOptions opt;
    const LpResult full = solve(build_milp(s.spec, s.model, A, w, {0, 0}, opt));
    const SubproblemLog lazy = solve_fixed_w(s.spec, s.model, A, w, opt);
    REQUIRE(full.status == LpStatus::optimal);
    CHECK(lazy.J == doctest::Approx(full.objective).epsilon(1e-9));
  }
}

TEST_CASE("row dropping matches the big-M relaxation") {
  for (const auto& sc : {fixtures::s2(), fixtures::s2(2500, 400), fixtures::s2(1200, 1500)}) {
    const Matrix A = build_A(sc.spec, AKind::uniform);
    MilpOptions dropped;
    dropped.offset_bound = 1e4;
    MilpOptions relaxed = dropped;
    relaxed.big_m1 = big_m1_min(sc.spec, sc.model, A, dropped.offset_bound);
    for (unsigned m = 0; m < 4; ++m) {
      const std::vector<int> w{int(m & 1U), int((m >> 1) & 1U)};
      const LpResult a = solve(build_milp(sc.spec, sc.model, A, w, {0, 0}, dropped));
      const LpResult b = solve(build_milp(sc.spec, sc.model, A, w, {0, 0}, relaxed));
      REQUIRE(a.status == b.status);
      if (a.status == LpStatus::optimal) CHECK(std::abs(a.objective - b.objective) <= 1e-6);
    }
  }
}

TEST_CASE("xi rows follow the printed gating") {
  const auto s = fixtures::s2(1000, 1000);
  const Matrix A = build_A(s.spec, AKind::uniform);
  MilpLayout lay;
  const LinearProgram plain = build_milp(s.spec, s.model, A, {1, 1}, {0, 0});
  const LinearProgram gated = build_milp(s.spec, s.model, A, {1, 1}, {0, 1}, {}, &lay);
  CHECK(gated.num_rows() == plain.num_rows() + 2 * lay.blocks.size());
  // xi_2 = 1 with w_2 = 1 enforces v_2 <= f~_2 in every block, which the
  // degraded mode caps at 2000.
  const LpResult r = solve(gated);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x[1] <= 2000.0 + 1e-6);
  CHECK(solve(plain).objective >= r.objective - 1e-9);
}

TEST_CASE("throughput optimum on S2") {
  const auto s = fixtures::s2();
  const Matrix A = build_A(s.spec, AKind::uniform);
  const OptResult r = maximize_throughput(s.spec, s.model, A);
  CHECK(r.J == doctest::Approx(3000.0).epsilon(1e-9));
  CHECK(r.v[0] + r.v[1] == doctest::Approx(r.J));
  CHECK(r.subproblem_count == 4);
  CHECK(r.pruned_count == 12);
  CHECK(r.certificate.verdict == Verdict::stable_certified);
  const InfiniteDemandOptimum opt = infinite_demand_optimum(s.spec, s.model);
  CHECK(opt.contains(r.v, r.w, 1e-6));

  // Both plans reach J = 2900 in the fixed-A LP; with w2 = 0 the vertex
  // certificate fails at this inflow, so the unmetered plan is returned.
  const auto d = fixtures::s2(2500, 400);
  const OptResult rd = maximize_throughput(d.spec, d.model, A);
  CHECK(rd.J == doctest::Approx(2900.0).epsilon(1e-9));
  CHECK(rd.v[0] == doctest::Approx(2500.0));
  CHECK(rd.v[1] == doctest::Approx(400.0));
  CHECK(rd.w == std::vector<int>{1, 1});
  const SubproblemLog metered = solve_fixed_w(d.spec, d.model, A, {1, 0});
  CHECK(metered.J == doctest::Approx(2900.0).epsilon(1e-9));
  CHECK(certify(d.spec, d.model, fixtures::config({2500, 400}, {1, 0}), A).verdict ==
        Verdict::no_certificate);

  const auto zero = fixtures::s2(0, 0);
  const OptResult rz = maximize_throughput(zero.spec, zero.model, A);
  CHECK(rz.J == 0.0);
  CHECK(rz.certificate.verdict == Verdict::stable_certified);
}

TEST_CASE("optimizer properties on sampled demands") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Matrix A = build_A(fixtures::s2().spec, AKind::uniform);
  for (int trial = 0; trial < 15; ++trial) {
    const double d1 = 3500 * u(rng);
    const double d2 = 2200 * u(rng);
    const auto small = fixtures::s2(d1, d2);
    const auto large = fixtures::s2(d1 + 400 * u(rng), d2 + 400 * u(rng));
    const OptResult a = maximize_throughput(small.spec, small.model, A);
    const OptResult b = maximize_throughput(large.spec, large.model, A);
    CHECK(b.J >= a.J - 1e-6);
    CHECK(a.J <= 3000.0 + 1e-6);
    CHECK(necessary_check(small.spec, small.model, ControlConfig{a.v, a.w}).passes);
    if (a.J > 0.0) {
      CHECK(certify(small.spec, small.model, ControlConfig{a.v, a.w}, A).verdict ==
            Verdict::stable_certified);
    }
  }
}

TEST_CASE("margin criterion") {
  const auto s = fixtures::s2();
  auto m = margin_criterion(s.spec, s.model, {2500, 400});
  CHECK(m.w == std::vector<std::vector<int>>{{1, 0}});
  m = margin_criterion(s.spec, s.model, {2000, 400});
  CHECK(m.w == std::vector<std::vector<int>>{{1, 1}});
  CHECK(m.v == std::vector<double>{2000, 400});
  m = margin_criterion(s.spec, s.model, {2200, 200});
  CHECK(m.w.size() == 2);
  CHECK_THROWS_AS(margin_criterion(s.spec, s.model, {2900, 400}), NotApplicableError);
  CHECK_THROWS_AS(margin_criterion(fixtures::h3().spec, fixtures::h3().model, {1, 1, 1}),
                  NotApplicableError);
  auto off = s.spec;
  off.mainline_ratio = {0.9, 0.0};
  CHECK_THROWS_AS(margin_criterion(off, s.model, {100, 100}), NotApplicableError);
}

TEST_CASE("infinite-demand optimal sets") {
  const auto s = fixtures::s2();
  const auto opt = infinite_demand_optimum(s.spec, s.model);
  CHECK(opt.mean_capacity == doctest::Approx(3000.0));
  CHECK(opt.metered_set.empty());
  CHECK_FALSE(opt.open_set.empty());
  CHECK(opt.contains({2600, 400}, {1, 1}, 1e-9));
  CHECK_FALSE(opt.contains({2600, 400}, {1, 0}, 1e-9));
  CHECK_FALSE(opt.contains({1000, 2000}, {1, 1}, 1e-9));
  CHECK(opt.contains(opt.v, opt.w, 1e-9));
  CHECK(opt.w == std::vector<int>{1, 1});

  auto flat = s;
  flat.spec.cells[1].capacity_drop = 0.0;
  flat.model.capacity = {{4000, 4000}, {4000, 4000}};
  CHECK(infinite_demand_optimum(flat.spec, flat.model).mean_capacity == 4000.0);
  auto moving = s;
  moving.spec.cells[0].capacity_drop = 1000.0;
  CHECK_THROWS_AS(infinite_demand_optimum(moving.spec, moving.model), NotApplicableError);
  auto pinned = s;
  pinned.model.steady = {1.0, 0.0};
  CHECK(infinite_demand_optimum(pinned.spec, pinned.model).mean_capacity == 4000.0);
}

TEST_CASE("hotspot algorithm") {
  const auto h3 = fixtures::h3();
  CHECK(hotspot_algorithm(h3.spec, h3.model, h3.spec.demand) == std::vector<int>{1, 0, 0});
  // Zero demand takes the free-flow branch for cell 2 and the margin branch
  // for the last cell.
  CHECK(hotspot_algorithm(h3.spec, h3.model, {0, 0, 0}) == std::vector<int>{1, 0, 0});
  const Matrix A = build_A(h3.spec, AKind::hotspot);
  CHECK(certify(h3.spec, h3.model, ControlConfig{h3.spec.demand, {1, 0, 0}}, A).verdict ==
        Verdict::stable_certified);
  CHECK_THROWS_AS(hotspot_algorithm(h3.spec, h3.model, {3000, 1000, 1000}), NotApplicableError);
  auto moving = h3.spec;
  moving.cells[0].capacity_drop = 500;
  CHECK_THROWS_AS(hotspot_algorithm(moving, h3.model, h3.spec.demand), NotApplicableError);
}

TEST_CASE("thread count does not change the result") {
  const auto h3 = fixtures::h3();
  const Matrix A = build_A(h3.spec, AKind::hotspot);
  OptimizeOptions one;
  one.threads = 1;
  OptimizeOptions many;
  many.threads = 4;
  const OptResult a = maximize_throughput(h3.spec, h3.model, A, one);
  const OptResult b = maximize_throughput(h3.spec, h3.model, A, many);
  CHECK(a.J == b.J);
  CHECK(a.v == b.v);
  CHECK(a.w == b.w);
}
