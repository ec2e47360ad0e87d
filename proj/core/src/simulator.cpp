#include "hyltl/simulator.hpp"

#include <cmath>
#include <random>

namespace hyltl {

namespace {

bool all_finite(const StateVec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

// One classical RK4 step of size h. Also reports the second-stage state
// x + (h/2) k1, which the caller uses as a cheap mid-step membership probe.
struct Rk4Step {
  StateVec x_new;
  StateVec x_mid;
};

Rk4Step rk4_step(const MapFn& f, const StateVec& x, double h) {
  const std::size_t n = x.size();
  StateVec k1(n), k2(n), k3(n), k4(n), tmp(n);
  f(x, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  StateVec mid = tmp;
  f(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  f(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
  f(tmp, k4);
  Rk4Step out;
  out.x_new.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.x_new[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  out.x_mid = std::move(mid);
  return out;
}

StateVec rk4_advance(const MapFn& f, const StateVec& x, double h) {
  if (h == 0.0) return x;
  return rk4_step(f, x, h).x_new;
}

// Bisection for the first truth flip of `event` inside one integration step.
// Precondition: event(x at offset 0) is false, event(x at offset h) is true.
struct StepEvent {
  double dt;       // offset of the bracket midpoint from the step start
  double dt_past;  // offset of the upper bracket end
  StateVec x;      // state at the midpoint
  StateVec x_past; // state at the upper bracket end (just past the boundary)
};

StepEvent locate_in_step(const MapFn& f, const StateVec& x_start, double h,
                         const std::function<bool(const StateVec&)>& event, double tol) {
  double lo = 0.0, hi = h;
  StateVec x_lo = x_start;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    StateVec x_mid = rk4_advance(f, x_lo, mid - lo);
    if (event(x_mid)) {
      hi = mid;
    } else {
      lo = mid;
      x_lo = std::move(x_mid);
    }
  }
  StepEvent out;
  out.dt = 0.5 * (lo + hi);
  out.dt_past = hi;
  out.x = rk4_advance(f, x_lo, out.dt - lo);
  out.x_past = rk4_advance(f, x_lo, hi - lo);
  return out;
}

}  // namespace

const char* termination_name(termination_reason r) {
  switch (r) {
    case termination_reason::budget_t: return "budget_t";
    case termination_reason::budget_j: return "budget_j";
    case termination_reason::zeno_flagged: return "zeno_flagged";
    case termination_reason::dead_end: return "dead_end";
    case termination_reason::left_state_space: return "left_state_space";
  }
  return "unknown";
}

SimResult simulate(const HybridSystem& sys, const StateVec& x0, const SimOptions& opts) {
  sys.validate();
  if (static_cast<int>(x0.size()) != sys.dim)
    raise(errc::bad_config, "initial state dimension does not match the system");
  if (!(opts.step > 0.0) || !(opts.event_tol > 0.0) || !(opts.t_max >= 0.0) ||
      opts.j_max < 0 || !(opts.zeno_gap >= 0.0) || opts.zeno_run < 1)
    raise(errc::bad_parameters, "simulation options must be positive");
  if (!all_finite(x0)) raise(errc::bad_config, "initial state is not finite");

  const bool start_in_C = sys.flow_set(x0);
  const bool start_in_D = sys.jump_set(x0);
  const bool near_C =
      start_in_C || (sys.flow_margin && sys.flow_margin(x0) <= opts.event_tol);
  if (!near_C && !start_in_D)
    raise(errc::not_in_flow_or_jump_set,
          "initial state lies outside closure(C) and D");

  std::mt19937_64 rng(opts.seed);
  auto coin = [&rng]() { return (rng() & 1u) != 0; };

  std::vector<Phase> phases;
  std::vector<HybridArc::PhaseSamples> phase_samples;
  HybridArc::PhaseSamples cur;
  cur.emplace_back(0.0, x0);

  double t = 0.0;
  std::int64_t j = 0;
  double phase_start_t = 0.0;
  StateVec x = x0;
  std::vector<JumpRecord> jump_log;
  int zeno_streak = 0;
  std::optional<termination_reason> reason;

  auto close_phase = [&]() {
    phases.push_back({j, phase_start_t, t});
    phase_samples.push_back(std::move(cur));
    cur = {};
  };

  auto commit_sample = [&](double tn, const StateVec& xn) {
    if (tn > cur.back().first) cur.emplace_back(tn, xn);
    t = tn;
    x = xn;
  };

  // Performs one jump from the current (t, x). Returns false when a budget or
  // the Zeno detector ends the run instead.
  auto try_jump = [&]() -> bool {
    if (j + 1 > opts.j_max) {
      reason = termination_reason::budget_j;
      return false;
    }
    double flow_time = t - phase_start_t;
    if (flow_time < opts.zeno_gap) {
      if (++zeno_streak >= opts.zeno_run) {
        reason = termination_reason::zeno_flagged;
        return false;
      }
    } else {
      zeno_streak = 0;
    }
    std::size_t pick = 0;
    if (opts.selection == selection_rule::random_choice && sys.jump_selections.size() > 1) {
      std::uniform_int_distribution<std::size_t> dist(0, sys.jump_selections.size() - 1);
      pick = dist(rng);
    }
    StateVec x_post(x.size());
    sys.jump_selections[pick](x, x_post);
    if (!all_finite(x_post))
      raise(errc::domain_error, "jump map produced a non-finite state");
    jump_log.push_back({t, j, x, x_post, pick});
    close_phase();
    ++j;
    phase_start_t = t;
    cur.emplace_back(t, x_post);
    x = x_post;
    if (!sys.in_state_space(x)) {
      reason = termination_reason::left_state_space;
      return false;
    }
    return true;
  };

  if (!sys.in_state_space(x)) reason = termination_reason::left_state_space;

  while (!reason) {
    const bool in_C = sys.flow_set(x);
    const bool in_D = sys.jump_set(x);
    const bool can_flow = in_C && !sys.flow_selections.empty();
    const bool can_jump = in_D && !sys.jump_selections.empty();

    bool do_jump;
    if (can_jump && can_flow) {
      switch (opts.priority) {
        case priority_rule::jump_first: do_jump = true; break;
        case priority_rule::flow_first: do_jump = false; break;
        default: do_jump = coin(); break;
      }
    } else if (can_jump) {
      do_jump = true;
    } else if (can_flow) {
      do_jump = false;
    } else {
      reason = termination_reason::dead_end;
      break;
    }

    if (do_jump) {
      try_jump();
      continue;
    }

    // ---- flow segment ----
    if (t >= opts.t_max) {
      reason = termination_reason::budget_t;
      break;
    }
    std::size_t fidx = 0;
    if (opts.selection == selection_rule::random_choice && sys.flow_selections.size() > 1) {
      std::uniform_int_distribution<std::size_t> dist(0, sys.flow_selections.size() - 1);
      fidx = dist(rng);
    }
    const MapFn& f = sys.flow_selections[fidx];
    // Jumps interrupt the flow only when D was off at the segment start and a
    // jump map exists; with flow_first the flow continues while C holds. With
    // random priority the coin is tossed once per D-entry event; when flow
    // wins, D is ignored for the rest of the segment.
    bool watch_jump =
        !in_D && opts.priority != priority_rule::flow_first && !sys.jump_selections.empty();

    auto event = [&](const StateVec& y) {
      return !sys.flow_set(y) || (watch_jump && sys.jump_set(y)) || !sys.in_state_space(y);
    };

    while (!reason) {
      double h = std::min(opts.step, opts.t_max - t);
      if (h <= 0.0) {
        reason = termination_reason::budget_t;
        break;
      }
      Rk4Step step = rk4_step(f, x, h);
      if (!all_finite(step.x_new))
        raise(errc::domain_error, "flow produced a non-finite state");

      const bool end_event = event(step.x_new);
      if (!end_event) {
        // Endpoint checks passed; make sure the step did not hop across a
        // boundary that is visible at the mid-step state.
        if (event(step.x_mid))
          raise(errc::step_too_large,
                "integration step straddles a set boundary; reduce SimOptions.step");
        commit_sample(t + h, step.x_new);
        continue;
      }

      const double seg_t = t;
      StepEvent ev = locate_in_step(f, x, h, event, opts.event_tol);
      commit_sample(seg_t + ev.dt, ev.x);

      const bool d_here = sys.jump_set(ev.x) || sys.jump_set(ev.x_past);
      if (d_here && !sys.jump_selections.empty()) {
        const bool can_flow_past =
            sys.flow_set(ev.x_past) && sys.in_state_space(ev.x_past);
        if (opts.priority == priority_rule::random_choice && can_flow_past && !coin()) {
          commit_sample(seg_t + ev.dt_past, ev.x_past);
          watch_jump = false;
          continue;
        }
        try_jump();
        break;
      }
      if (!sys.in_state_space(ev.x) || !sys.in_state_space(ev.x_past)) {
        reason = termination_reason::left_state_space;
        break;
      }
      // The flow cannot continue past the boundary and no jump is enabled.
      reason = termination_reason::dead_end;
      break;
    }
  }

  close_phase();
  SimResult result;
  result.arc = HybridArc(HybridTimeDomain(std::move(phases)), std::move(phase_samples));
  result.termination = *reason;
  result.jumps = std::move(jump_log);
  return result;
}

BoundaryHit locate_boundary(const MapFn& f, const StateVec& x_begin, double t_begin,
                            double t_end, const Predicate& pred, double tol, double step) {
  if (!(tol > 0.0) || !(step > 0.0) || !(t_end > t_begin))
    raise(errc::bad_parameters, "locate_boundary needs t_end > t_begin and positive tolerances");
  const bool start_truth = pred(x_begin);
  auto flipped = [&](const StateVec& y) { return pred(y) != start_truth; };

  double t = t_begin;
  StateVec x = x_begin;
  while (t < t_end) {
    double h = std::min(step, t_end - t);
    StateVec x_next = rk4_advance(f, x, h);
    if (flipped(x_next)) {
      StepEvent ev = locate_in_step(
          f, x, h, [&](const StateVec& y) { return flipped(y); }, tol);
      return {t + ev.dt, std::move(ev.x)};
    }
    t += h;
    x = std::move(x_next);
  }
  raise(errc::no_sign_change,
        "predicate does not change truth value across the bracket");
}

std::optional<HybridTime> measure_settling_time(const HybridArc& arc,
                                                const PropositionSet& props,
                                                const std::string& prop, double tol) {
  if (!props.contains(prop))
    raise(errc::unknown_proposition, "unknown proposition: " + prop);
  const bool use_margin = props.has_margin(prop);
  for (std::size_t i = 0; i < arc.sample_count(); ++i) {
    auto s = arc.sample(i);
    bool hit = use_margin ? props.margin(prop, *s.x) <= tol : props.holds(prop, *s.x);
    if (hit) return HybridTime{s.t, s.j};
  }
  return std::nullopt;
}

}  // namespace hyltl
