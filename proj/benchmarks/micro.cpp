#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "hyltl/automata.hpp"
#include "hyltl/certificates.hpp"
#include "hyltl/config.hpp"
#include "hyltl/expr.hpp"
#include "hyltl/ltl.hpp"
#include "hyltl/simulator.hpp"

namespace {

using namespace hyltl;

const CompiledSystem& ball() {
  static const CompiledSystem sys = compile_system(builtin_config("bouncing_ball"));
  return sys;
}

void bm_expression_eval(benchmark::State& state) {
  const Expr e = parse_expression("2 * gam * x1 + (x2 - 1) * (x2 + 1)");
  const std::map<std::string, double> constants = {{"gam", 1.0}};
  const std::vector<double> x = {0.7, -1.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_number(e, EvalEnv{x, &constants}));
  }
}
BENCHMARK(bm_expression_eval);

void bm_parse_expression(benchmark::State& state) {
  const std::string text = "min(abs(x1 - 0.5), 1 + 2 / (3 + x2 ^ 2)) >= x1 * x2";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_expression(text));
  }
}
BENCHMARK(bm_parse_expression);

void bm_simulate_ball(benchmark::State& state) {
  SimOptions opts;
  opts.t_max = 5.0;
  opts.j_max = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(ball().system, {1.0, 0.0}, opts));
  }
}
BENCHMARK(bm_simulate_ball);

void bm_evaluate_until(benchmark::State& state) {
  SimOptions opts;
  opts.t_max = 10.0;
  opts.j_max = 100;
  const SimResult res = simulate(ball().system, {2.0, 0.0}, opts);
  const Formula f = parse_formula("x2_ge_0 U x2_le_0");
  for (auto _ : state) {
    benchmark::DoNotOptimize(holds_for_all_times(f, res.arc, ball().props));
  }
}
BENCHMARK(bm_evaluate_until);

void bm_build_automaton(benchmark::State& state) {
  const Formula f = parse_formula("F p3 & (p1 U p2)");
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_automaton(f));
  }
}
BENCHMARK(bm_build_automaton);

void bm_flow_rate_sweep(benchmark::State& state) {
  const ScalarCertificate& b = ball().certificates.at("B");
  Sampler smp = ball().sampler;
  smp.counts = {40, 40};
  const std::vector<StateVec> pts = smp.points();
  for (auto _ : state) {
    double worst = -1e300;
    for (const StateVec& x : pts) worst = std::max(worst, u_c(ball().system, b, x));
    benchmark::DoNotOptimize(worst);
  }
}
BENCHMARK(bm_flow_rate_sweep);

}  // namespace

BENCHMARK_MAIN();
