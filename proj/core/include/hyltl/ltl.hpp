#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hyltl/hybrid.hpp"

namespace hyltl {

/// Linear temporal logic over hybrid time. Satisfaction at a point (t, j) of
/// an arc quantifies over the sample points (t', j') with t' + j' >= t + j:
///
///   X f   : (t, j+1) is in the domain and f holds there
///   F f   : some later-or-equal sample satisfies f
///   G f   : every later-or-equal sample satisfies f
///   p U q : some later-or-equal sample satisfies q and every sample strictly
///           before it (and >= the current point) satisfies p; the witness
///           itself does not need to satisfy p
///   p W q : G p or p U q
///
/// Concrete syntax (loosest to tightest):
///   iff     := imp ("<->" imp)*                      right associative
///   imp     := or_f ("->" imp)?                      right associative
///   or_f    := and_f ("|" and_f)*
///   and_f   := until ("&" until)*
///   until   := unary (("U" | "W") until)?            right associative
///   unary   := ("!" | "X" | "F" | "G" | "next" | "eventually" | "always") unary
///            | atom | "(" iff ")"
/// Atoms are proposition identifiers ([A-Za-z_][A-Za-z0-9_]*).

enum class ltl_op {
  atom,
  negation,
  conjunction,
  disjunction,
  implication,
  equivalence,
  next,
  eventually,
  always,
  until_strong,
  until_weak,
};

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  ltl_op op = ltl_op::atom;
  std::string atom;  // proposition name for ltl_op::atom
  Formula lhs;       // operand / left operand
  Formula rhs;       // right operand of binary operators
};

Formula make_atom(std::string name);
Formula make_unary(ltl_op op, Formula f);
Formula make_binary(ltl_op op, Formula l, Formula r);

/// Throws error(errc::syntax_error) with the offending byte offset.
Formula parse_formula(std::string_view text);

/// Minimal-parentheses rendering; parse_formula(print_formula(f)) is
/// structurally identical to f.
std::string print_formula(const Formula& f);

bool formula_equal(const Formula& a, const Formula& b);

/// Proposition names referenced by the formula, sorted and deduplicated.
std::vector<std::string> formula_atoms(const Formula& f);

/// Truth of f at the sample point `at` of the arc.
/// Throws error(errc::not_a_sample) when `at` is not a stored sample point and
/// error(errc::unknown_proposition) for unresolved atoms.
bool evaluate(const Formula& f, const HybridArc& arc, const PropositionSet& props,
              HybridTime at);

/// Evaluation with a diagnostic point: the witness sample for a satisfied
/// top-level F/U/X, or the first counterexample sample for a falsified
/// top-level G/W/X. `note` explains what the point is.
struct CheckResult {
  bool value = false;
  std::optional<HybridTime> point;
  std::string note;
};
CheckResult evaluate_with_witness(const Formula& f, const HybridArc& arc,
                                  const PropositionSet& props, HybridTime at);

/// True when f holds at every sample point of the arc.
bool holds_for_all_times(const Formula& f, const HybridArc& arc,
                         const PropositionSet& props);

/// Syntactically co-safe fragment: temporal operators restricted to
/// X / F / U (strong) and negation applied to atoms only. Implication and
/// equivalence are excluded (they hide negation).
bool is_sc_fragment(const Formula& f);

}  // namespace hyltl
