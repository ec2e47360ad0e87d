// Acceptance gate: one self-contained scenario per release criterion, one
// [PASS]/[FAIL] line each. Run with --criterion N to restrict to one
// criterion; the process exits 0 only when every selected criterion passes.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hyltl/automata.hpp"
#include "hyltl/certificates.hpp"
#include "hyltl/cli.hpp"
#include "hyltl/config.hpp"
#include "hyltl/errors.hpp"
#include "hyltl/expr.hpp"
#include "hyltl/ltl.hpp"
#include "hyltl/num_format.hpp"
#include "hyltl/simulator.hpp"
#include "hyltl/trace_io.hpp"

#include "support/fixtures.hpp"
#include "support/oracle.hpp"

namespace {

using namespace hyltl;

struct CriterionResult {
  bool pass = true;
  std::string artifact;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& note) {
    if (ok) return;
    pass = false;
    notes.push_back(note);
  }
};

std::string trace_text(const SimResult& res) {
  Trace trace;
  trace.arc = res.arc;
  return write_trace(trace);
}

CompiledSystem compiled(const std::string& name) {
  return compile_system(builtin_config(name));
}

// ---- criterion 1: bouncing-ball invariance certificate -------------------

CriterionResult criterion1() {
  CriterionResult r;
  CompiledSystem ball = compiled("bouncing_ball");
  Sampler smp = ball.sampler;
  smp.counts = {100, 100};

  CertificateReport rep =
      certify_always(ball.system, ball.props, "p_energy", ball.certificates.at("B"), smp);
  r.require(rep.passed(), "certify_always verdict: " + std::string(rep.passed() ? "passed" : "violated"));
  r.artifact += report_to_json(rep);

  std::vector<StateVec> k_points;
  for (const StateVec& x : smp.points())
    if (ball.props.holds("p_energy", x)) k_points.push_back(x);
  r.require(k_points.size() >= 50,
            "sampled only " + std::to_string(k_points.size()) + " invariant-set points");

  const ScalarFn& margin = ball.props.margin_fn("p_energy");
  SimOptions opts;
  opts.t_max = 3.0;
  opts.j_max = 50;
  std::size_t simulated = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 50 && !k_points.empty(); ++i) {
    const StateVec& x0 = k_points[(i * k_points.size()) / 50];
    SimResult res = simulate(ball.system, x0, opts);
    ++simulated;
    for (std::size_t s = 0; s < res.arc.sample_count(); ++s)
      worst = std::max(worst, margin(*res.arc.sample(s).x));
    r.artifact += trace_text(res);
  }
  r.require(simulated == 50, "expected 50 trajectories, ran " + std::to_string(simulated));
  r.require(worst <= 1e-6,
            "invariant margin reached " + shortest_double(worst) + " on a trace sample");
  r.artifact += "worst_margin=" + shortest_double(worst) + "\n";
  return r;
}

// ---- criterion 2: scalar finite-time certificate and settling bound ------

CriterionResult criterion2() {
  CriterionResult r;
  CompiledSystem fta = compiled("fta_scalar");
  const double c1 = fta.certificate_params.at("V").at("c1");
  const double c2 = fta.certificate_params.at("V").at("c2");

  CertificateReport rep = certify_eventually_flow(fta.system, fta.props, "at_origin",
                                                  fta.certificates.at("V"), c1, c2, fta.sampler);
  r.require(rep.passed(), "certify_eventually_flow verdict: violated");
  r.artifact += report_to_json(rep);

  SimOptions opts;
  opts.t_max = 3.0;
  opts.j_max = 3;
  SimResult res = simulate(fta.system, {1.0, 0.0}, opts);
  r.artifact += trace_text(res);

  std::optional<HybridTime> reach = measure_settling_time(res.arc, fta.props, "at_origin", 1e-4);
  r.require(reach.has_value(), "trajectory never came within 1e-4 of the origin");
  if (reach) {
    const double bound = settling_bound_flow(0.5, c1, c2);
    r.require(std::abs(reach->t - 2.0) <= 0.02 + 1e-6,
              "settling time " + shortest_double(reach->t) + " outside 2.0 +- 0.02");
    r.require(bound == 2.0, "settling bound " + shortest_double(bound) + " != 2.0");
    r.require(reach->t <= bound + 1e-9,
              "settling time " + shortest_double(reach->t) + " exceeds the bound");
    r.artifact += "reach=" + shortest_double(reach->t) + "," + std::to_string(reach->j) + "\n";
  }
  return r;
}

// ---- criterion 3: jump-mode settling bound ---------------------------------

CriterionResult criterion3() {
  CriterionResult r;
  CompiledSystem dec = compile_system(hyltl::testing::decrement_config());

  SimOptions opts;
  opts.t_max = 1.0;
  opts.j_max = 6;
  SimResult res = simulate(dec.system, {2.5}, opts);
  r.artifact += trace_text(res);

  std::optional<HybridTime> reach = measure_settling_time(res.arc, dec.props, "at_zero", 0.0);
  const std::int64_t bound = settling_bound_jump(2.5, 1.0);
  r.require(bound == 3, "settling_bound_jump(2.5, 1) = " + std::to_string(bound) + ", want 3");
  r.require(reach.has_value(), "decrement chain never reached zero");
  if (reach) {
    r.require(reach->j == bound,
              "reached zero after " + std::to_string(reach->j) + " jumps, bound says " +
                  std::to_string(bound));
    r.artifact += "jumps=" + std::to_string(reach->j) + "\n";
  }
  return r;
}

// ---- shared trajectory set for criteria 4 and 5 ----------------------------

std::vector<StateVec> ball_grid_starts() {
  std::vector<StateVec> starts;
  for (double h : {0.5, 1.0, 1.5, 2.0})
    for (double v : {-2.0, -1.0, 0.0, 1.0, 3.0}) starts.push_back({h, v});
  return starts;
}

// ---- criterion 4: bouncing-ball eventually certificate ---------------------

CriterionResult criterion4() {
  CriterionResult r;
  CompiledSystem ball = compiled("bouncing_ball");
  const double c1 = ball.certificate_params.at("V").at("c1");

  CertificateReport rep = certify_eventually_flow(ball.system, ball.props, "x2_le_0",
                                                  ball.certificates.at("V"), c1, 0.0, ball.sampler);
  r.require(rep.passed(), "certify_eventually_flow verdict: violated");
  r.artifact += report_to_json(rep);

  const Formula f = parse_formula("F x2_le_0");
  SimOptions opts;
  opts.t_max = 15.0;
  opts.j_max = 100;
  for (const StateVec& x0 : ball_grid_starts()) {
    SimResult res = simulate(ball.system, x0, opts);
    const bool at_origin_time = evaluate(f, res.arc, ball.props, {0.0, 0});
    const bool everywhere = holds_for_all_times(f, res.arc, ball.props);
    r.require(at_origin_time, "F x2_le_0 false at (0,0) from x0=(" + shortest_double(x0[0]) +
                                  ", " + shortest_double(x0[1]) + ")");
    r.require(everywhere, "F x2_le_0 fails at some sample from x0=(" + shortest_double(x0[0]) +
                              ", " + shortest_double(x0[1]) + ")");
    r.artifact += trace_text(res);
  }
  return r;
}

// ---- criterion 5: strong until certificate and monitoring ------------------

CriterionResult criterion5() {
  CriterionResult r;
  CompiledSystem ball = compiled("bouncing_ball");

  UntilParams up;
  up.mode = UntilParams::reach_mode::flow;
  up.c1 = ball.certificate_params.at("V").at("c1");
  up.c2 = 0.0;
  up.r = 3.0;
  up.check_jump_return = true;
  CertificateReport rep = certify_until_strong(ball.system, ball.props, "x2_ge_0", "x2_le_0",
                                               ball.certificates.at("V"), up, ball.sampler);
  r.require(rep.passed(), "certify_until_strong verdict: violated");
  bool has_return_condition = false;
  for (const ConditionReport& cond : rep.conditions)
    if (cond.name == "target.jumps_stay_in_basin") has_return_condition = true;
  r.require(has_return_condition, "report lacks the jump-return condition");
  r.artifact += report_to_json(rep);

  const Formula f = parse_formula("x2_ge_0 U x2_le_0");
  SimOptions opts;
  opts.t_max = 15.0;
  opts.j_max = 100;
  for (const StateVec& x0 : ball_grid_starts()) {
    SimResult res = simulate(ball.system, x0, opts);
    r.require(holds_for_all_times(f, res.arc, ball.props),
              "x2_ge_0 U x2_le_0 fails at some sample from x0=(" + shortest_double(x0[0]) +
                  ", " + shortest_double(x0[1]) + ")");
    r.artifact += trace_text(res);
  }
  return r;
}

// ---- criterion 6: next certificate -----------------------------------------

CriterionResult criterion6() {
  CriterionResult r;
  CompiledSystem sgn = compiled("sgn_jump");

  CertificateReport pass_rep = certify_next(sgn.system, sgn.props, "p_unit", sgn.sampler);
  r.require(pass_rep.passed(), "certify_next on the sign chain: violated");
  r.artifact += report_to_json(pass_rep);

  CompiledSystem ball = compiled("bouncing_ball");
  CertificateReport fail_rep = certify_next(ball.system, ball.props, "x2_le_0", ball.sampler);
  r.require(!fail_rep.passed(), "certify_next on the bouncing ball unexpectedly passed");
  r.artifact += report_to_json(fail_rep);

  std::ostringstream out, err;
  const int code = run_cli({"certify", "next", "--system", "bouncing_ball", "--prop", "x2_le_0"},
                           out, err);
  r.require(code == 2, "cli exit code " + std::to_string(code) + ", want 2");
  r.artifact += "cli_exit=" + std::to_string(code) + "\n" + out.str();

  // On a finite trace the next operator is decidable everywhere except the
  // final sample, which has no successor.
  const Formula f = parse_formula("X p_unit");
  SimOptions opts;
  opts.t_max = 1.0;
  opts.j_max = 5;
  for (const double x0 : {-0.5, 0.3, 2.0}) {
    SimResult res = simulate(sgn.system, {x0}, opts);
    const std::size_t n = res.arc.sample_count();
    for (std::size_t i = 0; i < n; ++i) {
      auto s = res.arc.sample(i);
      const bool value = evaluate(f, res.arc, sgn.props, {s.t, s.j});
      const bool want = i + 1 < n;
      r.require(value == want, "X p_unit at sample " + std::to_string(i) + " from x0=" +
                                   shortest_double(x0) + " is " + (value ? "true" : "false"));
    }
    r.artifact += trace_text(res);
  }
  return r;
}

// ---- criterion 7: semantics oracle -----------------------------------------

CriterionResult criterion7() {
  CriterionResult r;
  const hyltl::testing::OracleStats stats = hyltl::testing::run_oracle_equivalence(1000, 20260814);
  r.require(stats.cases == 1000, "ran " + std::to_string(stats.cases) + " cases");
  r.require(stats.mismatches == 0,
            std::to_string(stats.mismatches) + " evaluator mismatches against the oracle");
  r.require(stats.duality_failures == 0,
            std::to_string(stats.duality_failures) + " duality identities failed");
  r.artifact += "cases=" + std::to_string(stats.cases) +
                " mismatches=" + std::to_string(stats.mismatches) +
                " duality_failures=" + std::to_string(stats.duality_failures) + "\n";
  return r;
}

// ---- criterion 8: automaton construction -----------------------------------

CriterionResult criterion8() {
  CriterionResult r;
  const Formula f = parse_formula("F p3 & (p1 U p2)");
  const Fsa fsa = build_automaton(f);
  r.artifact += fsa_to_json(fsa);

  r.require(fsa.accepting == std::set<std::string>{"s1"}, "accepting set is not {s1}");
  r.require(fsa.initial == "s0", "initial state is not s0");
  const auto step_is = [&](const char* from, const char* obs, const char* want) {
    const std::string got = fsa_step(fsa, from, obs);
    r.require(got == want, std::string("step(") + from + ", " + obs + ") = " + got +
                               ", want " + want);
  };
  step_is("s0", "p1", "s0");
  step_is("s0", "p2", "s2");
  step_is("s2", "p1", "s2");
  step_is("s2", "p2", "s2");
  step_is("s2", "p3", "s1");
  step_is("s1", "p1", "s1");
  step_is("s1", "p2", "s1");
  step_is("s1", "p3", "s1");

  const PropositionSet props = hyltl::testing::word_props(3);
  std::size_t words = 0;
  std::size_t mismatches = 0;
  for (int len = 1; len <= 6; ++len) {
    std::vector<int> digits(static_cast<std::size_t>(len), 0);
    while (true) {
      std::vector<int> letters(digits.size(), 0);
      ObservationWord labels;
      for (std::size_t k = 0; k < digits.size(); ++k) {
        letters[k] = digits[k] + 1;
        labels.push_back("p" + std::to_string(letters[k]));
      }
      const bool by_fsa = run_automaton(fsa, labels).accepted;
      const bool by_eval = evaluate(f, hyltl::testing::word_arc(letters), props, {0.0, 0});
      if (by_fsa != by_eval) ++mismatches;
      ++words;
      int pos = len - 1;
      while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == 3) {
        digits[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
  r.require(words == 1092, "swept " + std::to_string(words) + " words, want 1092");
  r.require(mismatches == 0, std::to_string(mismatches) + " automaton/evaluation mismatches");
  r.require(!run_automaton(fsa, {}).accepted, "the empty word is accepted");
  r.artifact += "words=" + std::to_string(words) + " mismatches=" + std::to_string(mismatches) +
                "\n";
  return r;
}

// ---- criterion 9: firefly synchronization -----------------------------------

CriterionResult criterion9() {
  CriterionResult r;
  CompiledSystem fly = compiled("firefly");
  const ScalarCertificate& v = fly.certificates.at("V");
  const auto v_of = [&](std::span<const double> x) { return certificate_value(v, x); };

  SimOptions opts;
  opts.t_max = 10.0;
  opts.j_max = 50;
  std::size_t reached = 0;
  for (double a : {0.0, 0.2, 0.4, 0.6}) {
    for (double d : {0.05, 0.1, 0.2, 0.3, 0.38}) {
      const StateVec x0 = {a, a + d};
      if (v_of(x0) > 0.4) {
        r.require(false, "start point has V > 0.4");
        continue;
      }
      SimResult res = simulate(fly.system, x0, opts);
      bool reach = false;
      HybridTime when{0.0, 0};
      for (std::size_t i = 0; i < res.arc.sample_count() && !reach; ++i) {
        auto s = res.arc.sample(i);
        if (v_of(*s.x) <= 1e-4) {
          reach = true;
          when = {s.t, s.j};
        }
      }
      r.require(reach, "no synchronization from (" + shortest_double(x0[0]) + ", " +
                           shortest_double(x0[1]) + ")");
      if (reach) {
        ++reached;
        r.artifact += "reach=" + shortest_double(when.t) + "," + std::to_string(when.j) + "\n";
      }
      r.artifact += trace_text(res);
    }
  }
  r.require(reached == 20, std::to_string(reached) + "/20 start points synchronized");

  // The phase gap is constant along flows and never grows across jumps.
  double worst_flow = 0.0;
  double worst_jump = -std::numeric_limits<double>::infinity();
  for (const StateVec& x : fly.sampler.points()) {
    if (fly.system.flow_set(x)) worst_flow = std::max(worst_flow, std::abs(u_c(fly.system, v, x)));
    if (fly.system.jump_set(x)) worst_jump = std::max(worst_jump, u_d(fly.system, v, x));
  }
  r.require(worst_flow <= 1e-7, "u_C reached " + shortest_double(worst_flow));
  r.require(worst_jump <= 1e-9, "u_D reached " + shortest_double(worst_jump));
  r.artifact += "u_c=" + shortest_double(worst_flow) + " u_d=" + shortest_double(worst_jump) +
                "\n";
  return r;
}

// ---- criterion 10: parser round trips ---------------------------------------

std::string random_numeric(std::mt19937_64& rng, int depth);

std::string random_boolean(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 5);
  switch (pick(rng)) {
    case 0: return "(" + random_numeric(rng, depth - 1) + " <= " + random_numeric(rng, depth - 1) + ")";
    case 1: return "(" + random_numeric(rng, depth - 1) + " >= " + random_numeric(rng, depth - 1) + ")";
    case 2: return "(" + random_numeric(rng, depth - 1) + " = " + random_numeric(rng, depth - 1) + ")";
    case 3: return "(" + random_boolean(rng, depth - 1) + " and " + random_boolean(rng, depth - 1) + ")";
    case 4: return "(" + random_boolean(rng, depth - 1) + " or " + random_boolean(rng, depth - 1) + ")";
    default: return "(not " + random_boolean(rng, depth - 1) + ")";
  }
}

std::string random_numeric(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 11);
  std::uniform_int_distribution<int> digit(0, 9);
  switch (pick(rng)) {
    case 0: return std::to_string(digit(rng));
    case 1: return std::to_string(digit(rng)) + "." + std::to_string(digit(rng));
    case 2: return "x1";
    case 3: return "x2";
    case 4: return "(" + random_numeric(rng, depth - 1) + " + " + random_numeric(rng, depth - 1) + ")";
    case 5: return "(" + random_numeric(rng, depth - 1) + " - " + random_numeric(rng, depth - 1) + ")";
    case 6: return "(" + random_numeric(rng, depth - 1) + " * " + random_numeric(rng, depth - 1) + ")";
    case 7: return "(" + random_numeric(rng, depth - 1) + " / " + random_numeric(rng, depth - 1) + ")";
    case 8: return "(-" + random_numeric(rng, depth - 1) + ")";
    case 9: return "abs(" + random_numeric(rng, depth - 1) + ")";
    case 10: return "min(" + random_numeric(rng, depth - 1) + ", " + random_numeric(rng, depth - 1) + ")";
    default: return "max(" + random_numeric(rng, depth - 1) + ", " + random_numeric(rng, depth - 1) + ")";
  }
}

CriterionResult criterion10() {
  CriterionResult r;
  std::mt19937_64 rng(4242);
  const std::vector<std::string> atoms = {"a", "b", "c", "p1", "q"};
  std::uniform_int_distribution<int> depth(0, 4);

  std::size_t formula_ok = 0;
  for (int i = 0; i < 500; ++i) {
    const Formula f = hyltl::testing::random_formula(rng, depth(rng), atoms);
    const std::string text = print_formula(f);
    if (print_formula(parse_formula(text)) == text) ++formula_ok;
  }
  r.require(formula_ok == 500,
            std::to_string(500 - formula_ok) + " formula round trips changed the rendering");

  std::size_t expr_ok = 0;
  for (int i = 0; i < 500; ++i) {
    const std::string text =
        i % 2 == 0 ? random_numeric(rng, depth(rng)) : random_boolean(rng, depth(rng));
    const std::string first = print_expression(parse_expression(text));
    const std::string second = print_expression(parse_expression(first));
    if (first == second) ++expr_ok;
  }
  r.require(expr_ok == 500,
            std::to_string(500 - expr_ok) + " expression round trips changed the rendering");

  const auto positioned = [&](const char* what, const std::function<void()>& fn,
                              std::size_t length) {
    const hyltl::testing::ErrorProbe probe = hyltl::testing::probe_error(fn);
    r.require(probe.threw && probe.code == errc::syntax_error,
              std::string(what) + ": expected a syntax error");
    r.require(probe.position != error::no_position && probe.position <= length,
              std::string(what) + ": diagnostic carries no usable position");
  };
  for (const std::string text : {"", "1 +", "(x1", "x1 >=", "min(x1", "* 2", "1 2"})
    positioned(("expression '" + text + "'").c_str(),
               [&] { parse_expression(text); }, text.size());
  for (const std::string text : {"", "F", "p U", "(p1", "p1 &", "U p", "!"})
    positioned(("formula '" + text + "'").c_str(), [&] { parse_formula(text); }, text.size());

  r.artifact += "formulas=" + std::to_string(formula_ok) + " expressions=" +
                std::to_string(expr_ok) + "\n";
  return r;
}

// ---- harness ----------------------------------------------------------------

struct Entry {
  int id;
  const char* label;
  CriterionResult (*fn)();
  double budget_s;  // 0 = no runtime requirement
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {1, "bouncing-ball invariance certificate and monitored trajectories", criterion1, 10.0},
      {2, "scalar finite-time certificate and flow settling bound", criterion2, 5.0},
      {3, "decrement chain jump settling bound", criterion3, 0.0},
      {4, "bouncing-ball reach certificate and trace monitoring", criterion4, 0.0},
      {5, "bouncing-ball until certificate and trace monitoring", criterion5, 0.0},
      {6, "next certificate on the sign chain and the bouncing ball", criterion6, 0.0},
      {7, "semantics oracle equivalence and dualities", criterion7, 30.0},
      {8, "automaton table and word-level agreement", criterion8, 0.0},
      {9, "firefly synchronization and certificate rates", criterion9, 0.0},
      {10, "parser round trips and positioned diagnostics", criterion10, 0.0},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 1;
    }
  }

  bool all_pass = true;
  std::map<int, std::string> artifacts;

  const auto report = [&](int id, const char* label, bool pass, double seconds,
                          const std::vector<std::string>& notes) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << label << " ("
              << std::fixed;
    std::cout.precision(2);
    std::cout << seconds << "s)\n";
    for (const std::string& note : notes) std::cout << "       " << note << "\n";
    std::cout.unsetf(std::ios::fixed);
    all_pass = all_pass && pass;
  };

  for (const Entry& e : entries()) {
    if (only != 0 && only != e.id) continue;
    const auto begin = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      result = e.fn();
    } catch (const std::exception& ex) {
      result.pass = false;
      result.notes.push_back(std::string("exception: ") + ex.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    if (e.budget_s > 0.0 && seconds >= e.budget_s) {
      result.pass = false;
      result.notes.push_back("runtime " + std::to_string(seconds) + "s exceeds " +
                             std::to_string(e.budget_s) + "s");
    }
    artifacts[e.id] = result.artifact;
    report(e.id, e.label, result.pass, seconds, result.notes);
  }

  if (only == 0 || only == 11) {
    const auto begin = std::chrono::steady_clock::now();
    bool pass = true;
    std::vector<std::string> notes;
    for (const Entry& e : entries()) {
      if (e.id > 9) continue;
      std::string first;
      if (auto it = artifacts.find(e.id); it != artifacts.end()) {
        first = it->second;
      } else {
        try {
          first = e.fn().artifact;
        } catch (const std::exception& ex) {
          pass = false;
          notes.push_back("criterion " + std::to_string(e.id) + " threw: " + ex.what());
          continue;
        }
      }
      std::string second;
      try {
        second = e.fn().artifact;
      } catch (const std::exception& ex) {
        pass = false;
        notes.push_back("criterion " + std::to_string(e.id) + " rerun threw: " + ex.what());
        continue;
      }
      if (first != second) {
        pass = false;
        notes.push_back("criterion " + std::to_string(e.id) +
                        " produced different bytes on rerun");
      }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    report(11, "traces and reports are byte-identical across reruns", pass, seconds, notes);
  }

  return all_pass ? 0 : 1;
}
