#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "hyltl/hybrid.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace hyltl;
using hyltl::testing::probe_error;

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Closed-form bouncing-ball arc (unit gravity, restitution 1/2) built by hand
// from the ballistic flight formulas, one sample list per phase. Phase 0
// starts at (1, 0); the jump at t = sqrt(2) rescales the velocity.
HybridArc ball_arc() {
  auto flight = [](double x1_0, double x2_0, double dt) {
    return StateVec{x1_0 + x2_0 * dt - 0.5 * dt * dt, x2_0 - dt};
  };
  HybridArc::PhaseSamples phase0;
  for (double t : {0.0, 0.5 * kSqrt2, 1.0, kSqrt2})
    phase0.emplace_back(t, flight(1.0, 0.0, t));
  HybridArc::PhaseSamples phase1;
  for (double dt : {0.0, 0.5 * kSqrt2, kSqrt2})
    phase1.emplace_back(kSqrt2 + dt, flight(0.0, 0.5 * kSqrt2, dt));
  std::vector<Phase> phases = {{0, 0.0, kSqrt2}, {1, kSqrt2, 2.0 * kSqrt2}};
  return HybridArc(HybridTimeDomain(std::move(phases)),
                   {std::move(phase0), std::move(phase1)});
}

std::vector<Phase> phases(std::initializer_list<Phase> list) { return list; }

}  // namespace

TEST_CASE("validate_domain accepts a two-phase domain") {
  validate_domain(phases({{0, 0.0, 1.4142}, {1, 1.4142, 2.8}}));
  validate_domain(phases({{0, 0.0, 0.0}}));
  validate_domain(phases({{0, 0.0, 1.0}, {1, 1.0, 1.0}, {2, 1.0, 2.0}}));
}

TEST_CASE("validate_domain rejects each invariant violation with its category") {
  CHECK_EQ(probe_error([] { validate_domain({}); }).code, errc::nonzero_origin);
  CHECK_EQ(probe_error([] { validate_domain({{0, 0.5, 1.0}}); }).code,
           errc::nonzero_origin);
  CHECK_EQ(probe_error([] { validate_domain({{1, 0.0, 1.0}}); }).code,
           errc::nonzero_origin);
  CHECK_EQ(probe_error([] { validate_domain({{0, 0.0, 1.0}, {1, 2.0, 3.0}}); }).code,
           errc::gap_or_overlap);
  CHECK_EQ(probe_error([] { validate_domain({{0, 0.0, 1.0}, {1, 1.0, 0.5}}); }).code,
           errc::negative_interval);
  CHECK_EQ(probe_error([] { validate_domain({{0, 0.0, 1.0}, {2, 1.0, 2.0}}); }).code,
           errc::nonconsecutive_j);
}

TEST_CASE("domain membership and end point") {
  HybridTimeDomain dom(phases({{0, 0.0, 1.0}, {1, 1.0, 2.0}}));
  CHECK(dom.contains({0.0, 0}));
  CHECK(dom.contains({1.0, 0}));
  CHECK(dom.contains({1.0, 1}));
  CHECK(dom.contains({0.5, 0}));
  CHECK_FALSE(dom.contains({0.5, 1}));
  CHECK_FALSE(dom.contains({2.5, 1}));
  CHECK_FALSE(dom.contains({0.5, 2}));
  CHECK_EQ(dom.end().t, 2.0);
  CHECK_EQ(dom.end().j, 1);
}

TEST_CASE("compare_hybrid_times orders by t + j") {
  HybridTimeDomain dom(phases({{0, 0.0, 1.0}, {1, 1.0, 2.0}}));
  CHECK_EQ(compare_hybrid_times(dom, {1.0, 0}, {1.0, 1}), -1);
  CHECK_EQ(compare_hybrid_times(dom, {0.5, 0}, {0.5, 0}), 0);
  CHECK_EQ(compare_hybrid_times(dom, {2.0, 1}, {1.0, 1}), 1);
  CHECK_EQ(probe_error([&] { compare_hybrid_times(dom, {3.0, 0}, {0.0, 0}); }).code,
           errc::not_in_domain);
}

TEST_CASE("t + j is injective over random domains and orders samples totally") {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 50; ++n) {
    const HybridArc arc = hyltl::testing::random_arc(rng, 1);
    const auto& dom = arc.domain();
    std::vector<double> sums;
    std::vector<HybridTime> points;
    for (std::size_t i = 0; i < arc.sample_count(); ++i) {
      const auto s = arc.sample(i);
      sums.push_back(s.t + static_cast<double>(s.j));
      points.push_back({s.t, s.j});
    }
    for (std::size_t i = 0; i + 1 < sums.size(); ++i) CHECK_LT(sums[i], sums[i + 1]);

    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    for (int trial = 0; trial < 20; ++trial) {
      const HybridTime a = points[pick(rng)];
      const HybridTime b = points[pick(rng)];
      const HybridTime c = points[pick(rng)];
      const int ab = compare_hybrid_times(dom, a, b);
      CHECK_EQ(ab, -compare_hybrid_times(dom, b, a));
      if (ab <= 0 && compare_hybrid_times(dom, b, c) <= 0)
        CHECK_LE(compare_hybrid_times(dom, a, c), 0);
      if (ab == 0) {
        CHECK_EQ(a.t, b.t);
        CHECK_EQ(a.j, b.j);
      }
    }
  }
}

TEST_CASE("arc construction validates sample alignment") {
  HybridTimeDomain dom(phases({{0, 0.0, 1.0}}));
  CHECK_EQ(probe_error([&] { HybridArc(dom, {}); }).code, errc::bad_config);
  CHECK_EQ(probe_error([&] {
             HybridArc(dom, {{{0.5, {1.0}}, {1.0, {0.0}}}});
           }).code,
           errc::not_in_domain);
  CHECK_EQ(probe_error([&] {
             HybridArc(dom, {{{0.0, {1.0}}, {0.5, {1.0, 2.0}}, {1.0, {0.0}}}});
           }).code,
           errc::bad_config);
  CHECK_EQ(probe_error([&] {
             HybridArc(dom, {{{0.0, {1.0}}, {0.5, {1.0}}, {0.4, {1.0}}, {1.0, {0.0}}}});
           }).code,
           errc::bad_config);
}

TEST_CASE("sample_at returns stored samples exactly") {
  const HybridArc arc = ball_arc();
  CHECK_EQ(arc.dim(), 2);

  const StateVec at_jump = arc.sample_at({kSqrt2, 1});
  CHECK_EQ(at_jump[0], 0.0);
  CHECK_EQ(at_jump[1], doctest::Approx(0.5 * kSqrt2).epsilon(1e-12));

  const StateVec pre_jump = arc.sample_at({kSqrt2, 0});
  CHECK_EQ(pre_jump[1], doctest::Approx(-kSqrt2).epsilon(1e-12));

  const StateVec mid_flight = arc.sample_at({0.5 * kSqrt2, 0});
  CHECK_EQ(mid_flight[0], doctest::Approx(0.75).epsilon(1e-12));
  CHECK_EQ(mid_flight[1], doctest::Approx(-0.5 * kSqrt2).epsilon(1e-12));

  const StateVec initial = arc.sample_at({0.0, 0});
  CHECK_EQ(initial[0], 1.0);
  CHECK_EQ(initial[1], 0.0);
}

TEST_CASE("sample_at interpolates linearly between bracketing samples") {
  std::vector<Phase> dom = {{0, 0.0, 1.0}};
  HybridArc arc(HybridTimeDomain(std::move(dom)),
                {{{0.0, {1.0, 0.0}}, {1.0, {0.5, -1.0}}}});
  const StateVec mid = arc.sample_at({0.5, 0});
  CHECK_EQ(mid[0], 0.75);
  CHECK_EQ(mid[1], -0.5);
  CHECK_EQ(probe_error([&] { arc.sample_at({2.0, 0}); }).code, errc::not_in_domain);
  CHECK_EQ(probe_error([&] { arc.sample_at({0.5, 1}); }).code, errc::not_in_domain);
}

TEST_CASE("sample_at is continuous in t within a phase") {
  const HybridArc arc = ball_arc();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pick_t(0.0, kSqrt2 - 1e-6);
  for (int n = 0; n < 100; ++n) {
    const double t = pick_t(rng);
    const StateVec a = arc.sample_at({t, 0});
    const StateVec b = arc.sample_at({t + 1e-7, 0});
    CHECK_LE(std::fabs(a[0] - b[0]), 1e-5);
    CHECK_LE(std::fabs(a[1] - b[1]), 1e-5);
  }
}

TEST_CASE("sample_index resolves stored points and rejects interpolants") {
  const HybridArc arc = ball_arc();
  CHECK_EQ(arc.sample_count(), 7);
  CHECK_EQ(arc.sample_index({0.0, 0}).value(), 0);
  CHECK_EQ(arc.sample_index({kSqrt2, 0}).value(), 3);
  CHECK_EQ(arc.sample_index({kSqrt2, 1}).value(), 4);
  CHECK_EQ(arc.sample_index({kSqrt2 * (1.0 + 1e-14), 1}).value(), 4);
  CHECK_FALSE(arc.sample_index({0.3, 0}).has_value());
  CHECK_FALSE(arc.sample_index({5.0, 0}).has_value());

  const auto s = arc.sample(4);
  CHECK_EQ(s.j, 1);
  CHECK_EQ(s.t, kSqrt2);
  CHECK_EQ((*s.x)[0], 0.0);
}

TEST_CASE("proposition set resolves names, margins and indicators") {
  PropositionSet props = hyltl::testing::scalar_props();
  const StateVec inside = {-0.5};
  const StateVec outside = {2.0};

  CHECK(props.contains("a"));
  CHECK_FALSE(props.contains("z"));
  CHECK_EQ(props.names(), std::vector<std::string>{"a", "b", "c"});

  CHECK(props.holds("b", inside));
  CHECK_FALSE(props.holds("b", outside));
  CHECK(props.has_margin("b"));
  CHECK_EQ(props.margin("b", outside), 1.5);
  CHECK_EQ(props.margin_or_indicator("b", outside), 1.5);

  props.add("bare", [](std::span<const double> x) { return x[0] > 0.0; });
  CHECK_FALSE(props.has_margin("bare"));
  CHECK_EQ(props.margin_or_indicator("bare", outside), 0.0);
  CHECK_EQ(props.margin_or_indicator("bare", inside), 1.0);
  CHECK_FALSE(static_cast<bool>(props.margin_fn("bare")));
  CHECK(static_cast<bool>(props.margin_fn("b")));

  CHECK_EQ(probe_error([&] { props.holds("zzz", inside); }).code,
           errc::unknown_proposition);
  CHECK_EQ(probe_error([&] { props.margin("bare", inside); }).code, errc::bad_config);
}

TEST_CASE("margin sign agrees with predicate truth on random points") {
  PropositionSet props = hyltl::testing::scalar_props();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int n = 0; n < 200; ++n) {
    const StateVec x = {coord(rng)};
    for (const auto& name : props.names())
      CHECK_EQ(props.holds(name, x), props.margin(name, x) <= 0.0);
  }
}

TEST_CASE("hybrid system validation rejects incomplete data") {
  HybridSystem sys;
  sys.dim = 0;
  CHECK_EQ(probe_error([&] { sys.validate(); }).code, errc::bad_config);

  sys.dim = 1;
  CHECK_EQ(probe_error([&] { sys.validate(); }).code, errc::bad_config);

  sys.flow_set = [](std::span<const double>) { return true; };
  sys.jump_set = [](std::span<const double>) { return false; };
  CHECK_EQ(probe_error([&] { sys.validate(); }).code, errc::bad_config);

  sys.flow_selections.push_back(
      [](std::span<const double>, std::span<double> dx) { dx[0] = 1.0; });
  sys.validate();

  CHECK(sys.in_state_space(StateVec{5.0}));
  sys.state_space = [](std::span<const double> x) { return x[0] < 1.0; };
  CHECK_FALSE(sys.in_state_space(StateVec{5.0}));
}
