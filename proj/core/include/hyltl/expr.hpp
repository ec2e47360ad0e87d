#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyltl/errors.hpp"

namespace hyltl {

/// Small typed expression language over real-valued state vectors. It is used
/// for set membership predicates, vector field components, scalar certificate
/// functions and proposition margins. Expressions are immutable trees shared
/// through Expr handles.
///
/// Grammar (loosest to tightest binding):
///   or_expr   := and_expr ("or" and_expr)*
///   and_expr  := not_expr ("and" not_expr)*
///   not_expr  := "not" not_expr | cmp_expr
///   cmp_expr  := sum (("<=" | "<" | "=" | "==" | ">=" | ">" | "!=") sum)?
///   sum       := term (("+" | "-") term)*
///   term      := factor (("*" | "/") factor)*
///   factor    := "-" factor | power
///   power     := atom ("^" factor)?            (right associative)
///   atom      := number | variable | constant | call | "(" or_expr ")"
///   call      := ("abs"|"sgn"|"sqrt"|"exp"|"ln"|"ceil") "(" or_expr ")"
///              | ("min"|"max"|"pow") "(" or_expr "," or_expr ")"
///
/// Variables are spelled x1..xn (1-based). Any other identifier that is not a
/// keyword or function name refers to a named constant resolved at evaluation
/// time. sgn(0) evaluates to 1.

enum class expr_op {
  literal,
  variable,
  constant,
  // unary numeric
  neg,
  abs_fn,
  sgn_fn,
  sqrt_fn,
  exp_fn,
  ln_fn,
  ceil_fn,
  // binary numeric
  add,
  sub,
  mul,
  divide,
  pow_fn,
  min_fn,
  max_fn,
  // comparisons: numeric children, boolean result
  cmp_le,
  cmp_lt,
  cmp_eq,
  cmp_ge,
  cmp_gt,
  cmp_ne,
  // boolean connectives
  logic_and,
  logic_or,
  logic_not,
};

enum class expr_type { number, boolean };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  expr_op op = expr_op::literal;
  expr_type type = expr_type::number;
  double value = 0.0;   // literal payload
  int index = -1;       // variable payload, 0-based coordinate
  std::string name;     // variable spelling or constant name
  Expr lhs;             // first child, null for leaves
  Expr rhs;             // second child, null for unary nodes and leaves
};

/// Evaluation environment: the state vector bound to x1..xn plus a table of
/// named constants. The constants pointer may be null when the expression has
/// been pre-bound via bind_constants.
struct EvalEnv {
  std::span<const double> state;
  const std::map<std::string, double>* constants = nullptr;
};

/// Result of evaluating an expression: numbers carry `num`, booleans `truth`.
struct EvalValue {
  expr_type type = expr_type::number;
  double num = 0.0;
  bool truth = false;
};

/// Parses `text` into a typed expression tree.
/// Throws error(errc::syntax_error) with the byte offset of the offending
/// token, or error(errc::type_error) when an operator receives a child of the
/// wrong type (for example `1 + (x1 <= 0)`).
Expr parse_expression(std::string_view text);

/// Renders an expression with minimal parentheses. print/parse round-trips:
/// parse_expression(print_expression(e)) is structurally identical to e.
std::string print_expression(const Expr& e);

/// Structural equality of expression trees (same shape, ops, names, values).
bool expr_equal(const Expr& a, const Expr& b);

/// Evaluates an expression of either type.
/// Throws error(errc::unbound_variable) when a variable index is outside the
/// state vector or a constant name is missing, and error(errc::domain_error)
/// for sqrt of a negative number, ln of a non-positive number, division by
/// zero and non-finite pow/exp results.
EvalValue eval_expression(const Expr& e, const EvalEnv& env);

/// Convenience wrappers that additionally check the expression type.
double eval_number(const Expr& e, const EvalEnv& env);
bool eval_boolean(const Expr& e, const EvalEnv& env);

/// Returns a copy of `e` with every constant node replaced by a literal taken
/// from `constants`. Throws error(errc::unbound_variable) for missing names.
Expr bind_constants(const Expr& e, const std::map<std::string, double>& constants);

/// Verifies that every variable index is < dim.
/// Throws error(errc::unbound_variable) naming the first offender.
void check_dimension(const Expr& e, int dim);

/// Expression type of the root node.
expr_type type_of(const Expr& e);

}  // namespace hyltl
