#pragma once

// Reference implementations used to cross-check the library. The formula
// evaluator here deliberately loops over all sample pairs exactly as the
// quantifier definitions read, with no ordering shortcuts, so that agreement
// with the production evaluator is meaningful. It memoizes per (node, sample)
// only to keep the randomized sweeps fast; the decision logic stays literal.

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hyltl/hybrid.hpp"
#include "hyltl/ltl.hpp"

namespace hyltl::testing {

class BruteForceEvaluator {
public:
  BruteForceEvaluator(const HybridArc& arc, const PropositionSet& props)
      : arc_(arc), props_(props), n_(arc.sample_count()) {}

  bool eval(const Formula& f, std::size_t i) {
    const auto key = std::make_pair(f.get(), i);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second == 1;
    const bool value = compute(f, i);
    cache_[key] = value ? 1 : 0;
    return value;
  }

private:
  double sum(std::size_t k) const {
    const auto s = arc_.sample(k);
    return s.t + static_cast<double>(s.j);
  }

  bool compute(const Formula& f, std::size_t i) {
    const auto here = arc_.sample(i);
    switch (f->op) {
      case ltl_op::atom:
        return props_.holds(f->atom, *here.x);
      case ltl_op::negation:
        return !eval(f->lhs, i);
      case ltl_op::conjunction:
        return eval(f->lhs, i) && eval(f->rhs, i);
      case ltl_op::disjunction:
        return eval(f->lhs, i) || eval(f->rhs, i);
      case ltl_op::implication:
        return !eval(f->lhs, i) || eval(f->rhs, i);
      case ltl_op::equivalence:
        return eval(f->lhs, i) == eval(f->rhs, i);
      case ltl_op::next: {
        for (std::size_t k = 0; k < n_; ++k) {
          const auto s = arc_.sample(k);
          if (s.j == here.j + 1 && s.t == here.t) return eval(f->lhs, k);
        }
        return false;
      }
      case ltl_op::eventually: {
        for (std::size_t k = 0; k < n_; ++k)
          if (sum(k) >= sum(i) && eval(f->lhs, k)) return true;
        return false;
      }
      case ltl_op::always: {
        for (std::size_t k = 0; k < n_; ++k)
          if (sum(k) >= sum(i) && !eval(f->lhs, k)) return false;
        return true;
      }
      case ltl_op::until_strong:
        return until_strong(f, i);
      case ltl_op::until_weak: {
        bool always_lhs = true;
        for (std::size_t k = 0; k < n_; ++k)
          if (sum(k) >= sum(i) && !eval(f->lhs, k)) always_lhs = false;
        return always_lhs || until_strong(f, i);
      }
    }
    return false;
  }

  // Literal reading: a witness sample q at or after i, every sample strictly
  // between (by the t+j order) satisfying p; p is not required at the witness.
  bool until_strong(const Formula& f, std::size_t i) {
    for (std::size_t k = 0; k < n_; ++k) {
      if (sum(k) < sum(i) || !eval(f->rhs, k)) continue;
      bool prefix_ok = true;
      for (std::size_t m = 0; m < n_; ++m) {
        if (sum(m) >= sum(i) && sum(m) < sum(k) && !eval(f->lhs, m)) prefix_ok = false;
      }
      if (prefix_ok) return true;
    }
    return false;
  }

  const HybridArc& arc_;
  const PropositionSet& props_;
  std::size_t n_;
  std::map<std::pair<const FormulaNode*, std::size_t>, int> cache_;
};

// Propositions over a one-dimensional state, used by the randomized sweeps.
inline PropositionSet scalar_props() {
  PropositionSet props;
  props.add(
      "a", [](std::span<const double> x) { return x[0] >= 0.0; },
      [](std::span<const double> x) { return -x[0]; });
  props.add(
      "b", [](std::span<const double> x) { return x[0] <= 0.5; },
      [](std::span<const double> x) { return x[0] - 0.5; });
  props.add(
      "c", [](std::span<const double> x) { return std::abs(x[0]) >= 1.0; },
      [](std::span<const double> x) { return 1.0 - std::abs(x[0]); });
  return props;
}

// Random hybrid arc: up to max_samples samples spread over 1..5 phases, point
// phases included. Sample spacing stays far above the t+j rounding scale.
inline HybridArc random_arc(std::mt19937_64& rng, int dim, std::size_t max_samples = 200) {
  std::uniform_int_distribution<int> phase_count(1, 5);
  std::uniform_real_distribution<double> duration(0.1, 2.0);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int phases_wanted = phase_count(rng);
  std::vector<Phase> phases;
  std::vector<HybridArc::PhaseSamples> samples;
  double t = 0.0;
  std::size_t total = 0;
  for (int j = 0; j < phases_wanted; ++j) {
    const bool point_phase = unit(rng) < 0.3;
    const double len = point_phase ? 0.0 : duration(rng);
    std::size_t count = 1;
    if (!point_phase) {
      std::uniform_int_distribution<std::size_t> per_phase(2, 12);
      count = per_phase(rng);
    }
    if (total + count > max_samples) break;
    HybridArc::PhaseSamples phase;
    for (std::size_t s = 0; s < count; ++s) {
      const double frac =
          count == 1 ? 0.0 : static_cast<double>(s) / static_cast<double>(count - 1);
      StateVec x(dim);
      for (int d = 0; d < dim; ++d) x[d] = coord(rng);
      phase.emplace_back(t + len * frac, std::move(x));
    }
    phases.push_back(Phase{j, t, t + len});
    samples.push_back(std::move(phase));
    t += len;
    total += count;
  }
  return HybridArc(HybridTimeDomain(std::move(phases)), std::move(samples));
}

inline Formula random_formula(std::mt19937_64& rng, int depth,
                              const std::vector<std::string>& atoms) {
  std::uniform_int_distribution<std::size_t> pick_atom(0, atoms.size() - 1);
  if (depth <= 0) return make_atom(atoms[pick_atom(rng)]);
  std::uniform_int_distribution<int> pick_op(0, 10);
  switch (pick_op(rng)) {
    case 0: return make_atom(atoms[pick_atom(rng)]);
    case 1: return make_unary(ltl_op::negation, random_formula(rng, depth - 1, atoms));
    case 2:
      return make_binary(ltl_op::conjunction, random_formula(rng, depth - 1, atoms),
                         random_formula(rng, depth - 1, atoms));
    case 3:
      return make_binary(ltl_op::disjunction, random_formula(rng, depth - 1, atoms),
                         random_formula(rng, depth - 1, atoms));
    case 4:
      return make_binary(ltl_op::implication, random_formula(rng, depth - 1, atoms),
                         random_formula(rng, depth - 1, atoms));
    case 5:
      return make_binary(ltl_op::equivalence, random_formula(rng, depth - 1, atoms),
                         random_formula(rng, depth - 1, atoms));
    case 6: return make_unary(ltl_op::next, random_formula(rng, depth - 1, atoms));
    case 7: return make_unary(ltl_op::eventually, random_formula(rng, depth - 1, atoms));
    case 8: return make_unary(ltl_op::always, random_formula(rng, depth - 1, atoms));
    case 9:
      return make_binary(ltl_op::until_strong, random_formula(rng, depth - 1, atoms),
                         random_formula(rng, depth - 1, atoms));
    default:
      return make_binary(ltl_op::until_weak, random_formula(rng, depth - 1, atoms),
                         random_formula(rng, depth - 1, atoms));
  }
}

struct OracleStats {
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  std::size_t duality_failures = 0;
};

// One case = one random arc, one random formula, one random sample point.
// Checks production evaluator vs the brute-force one, then the operator
// dualities and the weak-until expansion at the same point.
inline OracleStats run_oracle_equivalence(std::size_t n_cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const PropositionSet props = scalar_props();
  const std::vector<std::string> atoms = {"a", "b", "c"};
  OracleStats stats;
  for (std::size_t n = 0; n < n_cases; ++n) {
    const HybridArc arc = random_arc(rng, 1);
    std::uniform_int_distribution<int> depth(0, 4);
    const Formula f = random_formula(rng, depth(rng), atoms);
    std::uniform_int_distribution<std::size_t> pick(0, arc.sample_count() - 1);
    const auto s = arc.sample(pick(rng));
    const HybridTime at{s.t, s.j};

    BruteForceEvaluator brute(arc, props);
    const bool expected = brute.eval(f, arc.sample_index(at).value());
    const bool got = evaluate(f, arc, props, at);
    ++stats.cases;
    if (expected != got) ++stats.mismatches;

    const Formula g = random_formula(rng, 2, atoms);
    const Formula not_g = make_unary(ltl_op::negation, g);
    const bool not_ev = evaluate(make_unary(ltl_op::negation, make_unary(ltl_op::eventually, g)),
                                 arc, props, at);
    const bool alw_not = evaluate(make_unary(ltl_op::always, not_g), arc, props, at);
    const bool not_alw = evaluate(make_unary(ltl_op::negation, make_unary(ltl_op::always, g)),
                                  arc, props, at);
    const bool ev_not = evaluate(make_unary(ltl_op::eventually, not_g), arc, props, at);
    const bool weak = evaluate(make_binary(ltl_op::until_weak, f, g), arc, props, at);
    const bool strong = evaluate(make_binary(ltl_op::until_strong, f, g), arc, props, at);
    const bool always_f = evaluate(make_unary(ltl_op::always, f), arc, props, at);
    if (not_ev != alw_not || not_alw != ev_not || weak != (strong || always_f))
      ++stats.duality_failures;
  }
  return stats;
}

// Encodes an observation word as a pure-jump arc: one point phase per letter,
// sample j carrying x1 = letters[j]. Letter 0 means "no observation holds".
inline HybridArc word_arc(const std::vector<int>& letters) {
  std::vector<Phase> phases;
  std::vector<HybridArc::PhaseSamples> samples;
  for (std::size_t j = 0; j < letters.size(); ++j) {
    phases.push_back(Phase{static_cast<std::int64_t>(j), 0.0, 0.0});
    samples.push_back({{0.0, StateVec{static_cast<double>(letters[j])}}});
  }
  return HybridArc(HybridTimeDomain(std::move(phases)), std::move(samples));
}

// Propositions p1..pn over word_arc states: pk holds exactly on letter k.
inline PropositionSet word_props(int n_obs) {
  PropositionSet props;
  for (int k = 1; k <= n_obs; ++k)
    props.add("p" + std::to_string(k),
              [k](std::span<const double> x) { return x[0] == static_cast<double>(k); });
  return props;
}

}  // namespace hyltl::testing
