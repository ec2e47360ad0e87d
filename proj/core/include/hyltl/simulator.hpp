#pragma once

#include <cstdint>
#include <optional>

#include "hyltl/hybrid.hpp"

namespace hyltl {

/// What to do when the state is in C and D at the same time.
enum class priority_rule { flow_first, jump_first, random_choice };

/// How to choose among several flow/jump selections.
enum class selection_rule { first, random_choice };

enum class termination_reason {
  budget_t,          // reached t_max
  budget_j,          // the next jump would exceed j_max
  zeno_flagged,      // zeno_run consecutive inter-jump flow times < zeno_gap
  dead_end,          // state in neither C nor D, or stuck on the boundary
  left_state_space,  // state left X
};

const char* termination_name(termination_reason r);

struct SimOptions {
  double t_max = 10.0;
  std::int64_t j_max = 100;
  double step = 1e-3;      // fixed RK4 step
  double event_tol = 1e-9; // bisection bracket width for event times
  double zeno_gap = 1e-6;
  int zeno_run = 10;
  priority_rule priority = priority_rule::jump_first;
  selection_rule selection = selection_rule::first;
  std::uint64_t seed = 0;
};

struct JumpRecord {
  double t = 0.0;
  std::int64_t j = 0;  // jump counter before the jump
  StateVec x_pre;
  StateVec x_post;
  std::size_t selection = 0;
};

struct SimResult {
  HybridArc arc;
  termination_reason termination = termination_reason::budget_t;
  std::vector<JumpRecord> jumps;
};

/// Simulates the hybrid system from x0 until a budget, Zeno flag, dead end or
/// state-space exit. Flowing uses classical fixed-step RK4; set boundaries are
/// localized by bisection to within event_tol of hybrid time. Given the same
/// options (including seed) the result is bit-reproducible.
///
/// Throws:
///   error(errc::not_in_flow_or_jump_set)  x0 outside closure(C) u D
///   error(errc::step_too_large)           a step straddles a set boundary in
///                                         a way endpoint checks cannot see
///   error(errc::bad_parameters)           non-positive step/tolerances
///   error(errc::domain_error)             dynamics produced non-finite states
SimResult simulate(const HybridSystem& sys, const StateVec& x0, const SimOptions& opts = {});

struct BoundaryHit {
  double t = 0.0;
  StateVec x;
};

/// Integrates dx/dt = f(x) from x_begin at t_begin and finds the first time in
/// [t_begin, t_end] where pred changes truth value relative to t_begin.
/// Returns the midpoint of the final bracket (width <= tol) and the state
/// there. Throws error(errc::no_sign_change) when pred never flips across the
/// bracket and error(errc::bad_parameters) for a bad bracket or tolerance.
BoundaryHit locate_boundary(const MapFn& f, const StateVec& x_begin, double t_begin,
                            double t_end, const Predicate& pred, double tol,
                            double step = 1e-3);

/// First sample point (in hybrid-time order) where the proposition holds:
/// margin(x) <= tol when the proposition has a margin, exact predicate truth
/// otherwise. Returns nullopt when no sample qualifies.
/// Throws error(errc::unknown_proposition) for unknown names.
std::optional<HybridTime> measure_settling_time(const HybridArc& arc,
                                                const PropositionSet& props,
                                                const std::string& prop, double tol);

}  // namespace hyltl
