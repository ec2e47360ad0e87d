#pragma once

// Deterministic finite state automata for a co-safe formula fragment, word
// acceptance, and the automaton-augmented hybrid system whose discrete state
// advances on jumps.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hyltl/hybrid.hpp"
#include "hyltl/ltl.hpp"

namespace hyltl {

// Deterministic automaton over observation labels. `transitions` is a partial
// map over the declared observations; pairs it leaves undefined route to the
// reject `sink` (empty when the map is already total). A word may also carry a
// "!"-prefixed label, meaning "no declared observation holds"; those labels
// all behave alike and are routed through `defaults` (per-state successor,
// sink when absent).
struct Fsa {
  std::vector<std::string> states;  // includes the sink when present
  std::string initial;
  std::vector<std::string> observations;
  std::map<std::pair<std::string, std::string>, std::string> transitions;
  std::map<std::string, std::string> defaults;
  std::set<std::string> accepting;
  std::string sink;  // empty when every pair is defined

  // Throws bad_config when a field references an undeclared state or
  // observation, or the initial state is missing.
  void validate() const;
};

using ObservationWord = std::vector<std::string>;

// Builds the automaton for formulas of the shape
//   g ::= F a | a U a' | X a | g & g
// where a, a' are atoms or negated atoms. Accepted words are exactly the
// finite words satisfying the formula, one observation per position.
// Conjunction is realized as a synchronous product; unreachable and
// never-accepting states collapse into the sink. States are renamed
// canonically: initial = s0, accepting = s1, remaining states s2, s3, ... in
// breadth-first discovery order. Throws unsupported_formula outside the
// fragment.
Fsa build_automaton(const Formula& f);

// Single transition step; `label` must be a declared observation or start
// with '!'. Throws unknown_observation otherwise, and bad_config when the
// automaton has no sink to absorb an undefined pair.
std::string fsa_step(const Fsa& fsa, const std::string& state, const std::string& label);

struct FsaRun {
  std::vector<std::string> run;  // length word.size() + 1, starts at initial
  bool accepted = false;
};

FsaRun run_automaton(const Fsa& fsa, const ObservationWord& word);

// Observation label at a state: the first proposition in obs_order that
// holds, otherwise the negation of the first listed one. Throws
// unknown_proposition for unknown names or an empty order.
std::string observe(std::span<const double> x, const PropositionSet& props,
                    const std::vector<std::string>& obs_order);

// Hybrid system with state (x, s) where s indexes fsa.states: flows keep s
// constant, each jump advances s by the transition on the observation at the
// pre-jump state. Propositions lift to the extended state, plus
// `fsa_accepting` which holds when s is an accepting state.
struct AugmentedSystem {
  HybridSystem system;
  PropositionSet props;
  std::vector<std::string> state_names;  // s value i means state_names[i]
  std::size_t initial_index = 0;
};

AugmentedSystem augment_system(const HybridSystem& base, const Fsa& fsa,
                               const PropositionSet& props,
                               const std::vector<std::string>& obs_order);

// Structured document and graph-description forms. JSON round-trips exactly.
std::string fsa_to_json(const Fsa& fsa);
Fsa fsa_from_json(const std::string& text);
std::string fsa_to_dot(const Fsa& fsa);

}  // namespace hyltl
