#include "hyltl/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace hyltl {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class tok_kind {
  number,
  ident,
  plus,
  minus,
  star,
  slash,
  caret,
  lparen,
  rparen,
  comma,
  le,
  lt,
  eq,
  ge,
  gt,
  ne,
  end,
};

struct Token {
  tok_kind kind = tok_kind::end;
  double number = 0.0;
  std::string text;
  std::size_t pos = 0;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.pos = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = tok_kind::end;
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = tok_kind::ident;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    switch (c) {
      case '+': tok_.kind = tok_kind::plus; ++pos_; return;
      case '-': tok_.kind = tok_kind::minus; ++pos_; return;
      case '*': tok_.kind = tok_kind::star; ++pos_; return;
      case '/': tok_.kind = tok_kind::slash; ++pos_; return;
      case '^': tok_.kind = tok_kind::caret; ++pos_; return;
      case '(': tok_.kind = tok_kind::lparen; ++pos_; return;
      case ')': tok_.kind = tok_kind::rparen; ++pos_; return;
      case ',': tok_.kind = tok_kind::comma; ++pos_; return;
      case '<':
        ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '=') {
          tok_.kind = tok_kind::le;
          ++pos_;
        } else {
          tok_.kind = tok_kind::lt;
        }
        return;
      case '>':
        ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '=') {
          tok_.kind = tok_kind::ge;
          ++pos_;
        } else {
          tok_.kind = tok_kind::gt;
        }
        return;
      case '=':
        ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '=') ++pos_;
        tok_.kind = tok_kind::eq;
        return;
      case '!':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
          tok_.kind = tok_kind::ne;
          pos_ += 2;
          return;
        }
        raise(errc::syntax_error, "unexpected '!' (did you mean '!=' or 'not'?)", pos_);
      default:
        raise(errc::syntax_error, std::string("unexpected character '") + c + "'", pos_);
    }
  }

  void lex_number() {
    const char* begin = src_.data() + pos_;
    const char* end = src_.data() + src_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) raise(errc::syntax_error, "malformed number", pos_);
    tok_.kind = tok_kind::number;
    tok_.number = value;
    pos_ += static_cast<std::size_t>(ptr - begin);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

Expr make_leaf(expr_op op, expr_type type) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->type = type;
  return n;
}

Expr make_literal(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = expr_op::literal;
  n->type = expr_type::number;
  n->value = v;
  return n;
}

Expr make_unary(expr_op op, expr_type type, Expr child) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->type = type;
  n->lhs = std::move(child);
  return n;
}

Expr make_binary(expr_op op, expr_type type, Expr l, Expr r) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->type = type;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

void require_number(const Expr& e, const char* ctx, std::size_t pos) {
  if (e->type != expr_type::number)
    raise(errc::type_error, std::string(ctx) + " expects a numeric operand", pos);
}

void require_boolean(const Expr& e, const char* ctx, std::size_t pos) {
  if (e->type != expr_type::boolean)
    raise(errc::type_error, std::string(ctx) + " expects a boolean operand", pos);
}

// Returns the variable index for spellings x1, x2, ... and -1 otherwise.
int variable_index(const std::string& name) {
  if (name.size() < 2 || name[0] != 'x') return -1;
  if (name[1] == '0') return -1;
  for (std::size_t i = 1; i < name.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return -1;
  return std::atoi(name.c_str() + 1) - 1;
}

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Expr parse() {
    Expr e = parse_or();
    const Token& t = lex_.peek();
    if (t.kind != tok_kind::end)
      raise(errc::syntax_error, "unexpected trailing input", t.pos);
    return e;
  }

private:
  Expr parse_or() {
    Expr e = parse_and();
    while (is_keyword("or")) {
      Token op = lex_.take();
      require_boolean(e, "'or'", op.pos);
      Expr r = parse_and();
      require_boolean(r, "'or'", op.pos);
      e = make_binary(expr_op::logic_or, expr_type::boolean, std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_and() {
    Expr e = parse_not();
    while (is_keyword("and")) {
      Token op = lex_.take();
      require_boolean(e, "'and'", op.pos);
      Expr r = parse_not();
      require_boolean(r, "'and'", op.pos);
      e = make_binary(expr_op::logic_and, expr_type::boolean, std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_not() {
    if (is_keyword("not")) {
      Token op = lex_.take();
      Expr e = parse_not();
      require_boolean(e, "'not'", op.pos);
      return make_unary(expr_op::logic_not, expr_type::boolean, std::move(e));
    }
    return parse_cmp();
  }

  Expr parse_cmp() {
    Expr e = parse_sum();
    const Token& t = lex_.peek();
    expr_op op;
    switch (t.kind) {
      case tok_kind::le: op = expr_op::cmp_le; break;
      case tok_kind::lt: op = expr_op::cmp_lt; break;
      case tok_kind::eq: op = expr_op::cmp_eq; break;
      case tok_kind::ge: op = expr_op::cmp_ge; break;
      case tok_kind::gt: op = expr_op::cmp_gt; break;
      case tok_kind::ne: op = expr_op::cmp_ne; break;
      default: return e;
    }
    Token tk = lex_.take();
    require_number(e, "comparison", tk.pos);
    Expr r = parse_sum();
    require_number(r, "comparison", tk.pos);
    return make_binary(op, expr_type::boolean, std::move(e), std::move(r));
  }

  Expr parse_sum() {
    Expr e = parse_term();
    for (;;) {
      const Token& t = lex_.peek();
      if (t.kind != tok_kind::plus && t.kind != tok_kind::minus) break;
      Token op = lex_.take();
      require_number(e, op.kind == tok_kind::plus ? "'+'" : "'-'", op.pos);
      Expr r = parse_term();
      require_number(r, op.kind == tok_kind::plus ? "'+'" : "'-'", op.pos);
      e = make_binary(op.kind == tok_kind::plus ? expr_op::add : expr_op::sub,
                      expr_type::number, std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_term() {
    Expr e = parse_factor();
    for (;;) {
      const Token& t = lex_.peek();
      if (t.kind != tok_kind::star && t.kind != tok_kind::slash) break;
      Token op = lex_.take();
      require_number(e, op.kind == tok_kind::star ? "'*'" : "'/'", op.pos);
      Expr r = parse_factor();
      require_number(r, op.kind == tok_kind::star ? "'*'" : "'/'", op.pos);
      e = make_binary(op.kind == tok_kind::star ? expr_op::mul : expr_op::divide,
                      expr_type::number, std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_factor() {
    const Token& t = lex_.peek();
    if (t.kind == tok_kind::minus) {
      Token op = lex_.take();
      Expr e = parse_factor();
      require_number(e, "unary '-'", op.pos);
      return make_unary(expr_op::neg, expr_type::number, std::move(e));
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr e = parse_atom();
    if (lex_.peek().kind == tok_kind::caret) {
      Token op = lex_.take();
      require_number(e, "'^'", op.pos);
      Expr r = parse_factor();  // right associative, allows x ^ -2 and x ^ y ^ z
      require_number(r, "'^'", op.pos);
      return make_binary(expr_op::pow_fn, expr_type::number, std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_atom() {
    Token t = lex_.take();
    switch (t.kind) {
      case tok_kind::number:
        return make_literal(t.number);
      case tok_kind::lparen: {
        Expr e = parse_or();
        expect(tok_kind::rparen, "')'");
        return e;
      }
      case tok_kind::ident:
        return parse_ident(std::move(t));
      case tok_kind::end:
        raise(errc::syntax_error, "unexpected end of input", t.pos);
      default:
        raise(errc::syntax_error, "expected a number, name or '('", t.pos);
    }
  }

  Expr parse_ident(Token t) {
    if (t.text == "and" || t.text == "or" || t.text == "not")
      raise(errc::syntax_error, "keyword '" + t.text + "' is not a value", t.pos);

    struct Fn {
      const char* name;
      expr_op op;
      int arity;
    };
    static const Fn fns[] = {
        {"abs", expr_op::abs_fn, 1},  {"sgn", expr_op::sgn_fn, 1},
        {"sqrt", expr_op::sqrt_fn, 1}, {"exp", expr_op::exp_fn, 1},
        {"ln", expr_op::ln_fn, 1},     {"ceil", expr_op::ceil_fn, 1},
        {"min", expr_op::min_fn, 2},   {"max", expr_op::max_fn, 2},
        {"pow", expr_op::pow_fn, 2},
    };
    for (const Fn& fn : fns) {
      if (t.text != fn.name) continue;
      expect(tok_kind::lparen, "'(' after function name");
      Expr a = parse_or();
      require_number(a, fn.name, t.pos);
      if (fn.arity == 1) {
        expect(tok_kind::rparen, "')'");
        return make_unary(fn.op, expr_type::number, std::move(a));
      }
      expect(tok_kind::comma, "','");
      Expr b = parse_or();
      require_number(b, fn.name, t.pos);
      expect(tok_kind::rparen, "')'");
      return make_binary(fn.op, expr_type::number, std::move(a), std::move(b));
    }

    int idx = variable_index(t.text);
    auto n = std::make_shared<ExprNode>();
    n->type = expr_type::number;
    n->name = std::move(t.text);
    if (idx >= 0) {
      n->op = expr_op::variable;
      n->index = idx;
    } else {
      n->op = expr_op::constant;
    }
    return n;
  }

  bool is_keyword(const char* kw) const {
    const Token& t = lex_.peek();
    return t.kind == tok_kind::ident && t.text == kw;
  }

  void expect(tok_kind kind, const char* what) {
    Token t = lex_.take();
    if (t.kind != kind) raise(errc::syntax_error, std::string("expected ") + what, t.pos);
  }

  Lexer lex_;
};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

// Binding strength used to decide where parentheses are required.
int prec(const ExprNode& n) {
  switch (n.op) {
    case expr_op::logic_or: return 1;
    case expr_op::logic_and: return 2;
    case expr_op::logic_not: return 3;
    case expr_op::cmp_le:
    case expr_op::cmp_lt:
    case expr_op::cmp_eq:
    case expr_op::cmp_ge:
    case expr_op::cmp_gt:
    case expr_op::cmp_ne: return 4;
    case expr_op::add:
    case expr_op::sub: return 5;
    case expr_op::mul:
    case expr_op::divide: return 6;
    case expr_op::neg: return 7;
    case expr_op::pow_fn: return 8;
    default: return 9;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void print_node(const Expr& e, std::string& out);

void print_child(const Expr& child, int min_prec, std::string& out) {
  if (prec(*child) < min_prec) {
    out += '(';
    print_node(child, out);
    out += ')';
  } else {
    print_node(child, out);
  }
}

void print_binary(const Expr& e, const char* sym, std::string& out) {
  int p = prec(*e);
  print_child(e->lhs, p, out);
  out += sym;
  print_child(e->rhs, p + 1, out);  // right operand of a left-assoc op needs parens at equal prec
}

void print_call(const char* name, const Expr& e, std::string& out) {
  out += name;
  out += '(';
  print_node(e->lhs, out);
  if (e->rhs) {
    out += ", ";
    print_node(e->rhs, out);
  }
  out += ')';
}

void print_node(const Expr& e, std::string& out) {
  switch (e->op) {
    case expr_op::literal: out += format_double(e->value); return;
    case expr_op::variable:
    case expr_op::constant: out += e->name; return;
    case expr_op::neg:
      out += '-';
      print_child(e->lhs, prec(*e), out);
      return;
    case expr_op::abs_fn: print_call("abs", e, out); return;
    case expr_op::sgn_fn: print_call("sgn", e, out); return;
    case expr_op::sqrt_fn: print_call("sqrt", e, out); return;
    case expr_op::exp_fn: print_call("exp", e, out); return;
    case expr_op::ln_fn: print_call("ln", e, out); return;
    case expr_op::ceil_fn: print_call("ceil", e, out); return;
    case expr_op::min_fn: print_call("min", e, out); return;
    case expr_op::max_fn: print_call("max", e, out); return;
    case expr_op::add: print_binary(e, " + ", out); return;
    case expr_op::sub: print_binary(e, " - ", out); return;
    case expr_op::mul: print_binary(e, "*", out); return;
    case expr_op::divide: print_binary(e, "/", out); return;
    case expr_op::pow_fn: {
      // right associative: parenthesize any non-atomic left operand,
      // allow unary minus and nested powers on the right
      print_child(e->lhs, 9, out);
      out += '^';
      print_child(e->rhs, 7, out);
      return;
    }
    case expr_op::cmp_le: print_binary(e, " <= ", out); return;
    case expr_op::cmp_lt: print_binary(e, " < ", out); return;
    case expr_op::cmp_eq: print_binary(e, " = ", out); return;
    case expr_op::cmp_ge: print_binary(e, " >= ", out); return;
    case expr_op::cmp_gt: print_binary(e, " > ", out); return;
    case expr_op::cmp_ne: print_binary(e, " != ", out); return;
    case expr_op::logic_and: print_binary(e, " and ", out); return;
    case expr_op::logic_or: print_binary(e, " or ", out); return;
    case expr_op::logic_not:
      out += "not ";
      print_child(e->lhs, prec(*e), out);
      return;
  }
}

}  // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string print_expression(const Expr& e) {
  std::string out;
  print_node(e, out);
  return out;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->type != b->type) return false;
  switch (a->op) {
    case expr_op::literal:
      return a->value == b->value || (std::isnan(a->value) && std::isnan(b->value));
    case expr_op::variable: return a->index == b->index;
    case expr_op::constant: return a->name == b->name;
    default: break;
  }
  if (!expr_equal(a->lhs, b->lhs)) return false;
  if (static_cast<bool>(a->rhs) != static_cast<bool>(b->rhs)) return false;
  return !a->rhs || expr_equal(a->rhs, b->rhs);
}

namespace {

double eval_num_rec(const Expr& e, const EvalEnv& env);

bool eval_bool_rec(const Expr& e, const EvalEnv& env) {
  switch (e->op) {
    case expr_op::cmp_le: return eval_num_rec(e->lhs, env) <= eval_num_rec(e->rhs, env);
    case expr_op::cmp_lt: return eval_num_rec(e->lhs, env) < eval_num_rec(e->rhs, env);
    case expr_op::cmp_eq: return eval_num_rec(e->lhs, env) == eval_num_rec(e->rhs, env);
    case expr_op::cmp_ge: return eval_num_rec(e->lhs, env) >= eval_num_rec(e->rhs, env);
    case expr_op::cmp_gt: return eval_num_rec(e->lhs, env) > eval_num_rec(e->rhs, env);
    case expr_op::cmp_ne: return eval_num_rec(e->lhs, env) != eval_num_rec(e->rhs, env);
    case expr_op::logic_and: return eval_bool_rec(e->lhs, env) && eval_bool_rec(e->rhs, env);
    case expr_op::logic_or: return eval_bool_rec(e->lhs, env) || eval_bool_rec(e->rhs, env);
    case expr_op::logic_not: return !eval_bool_rec(e->lhs, env);
    default:
      raise(errc::type_error, "expected a boolean expression");
  }
}

double eval_num_rec(const Expr& e, const EvalEnv& env) {
  switch (e->op) {
    case expr_op::literal: return e->value;
    case expr_op::variable: {
      if (e->index < 0 || static_cast<std::size_t>(e->index) >= env.state.size())
        raise(errc::unbound_variable,
              "variable " + e->name + " is outside the state vector");
      return env.state[static_cast<std::size_t>(e->index)];
    }
    case expr_op::constant: {
      if (env.constants) {
        auto it = env.constants->find(e->name);
        if (it != env.constants->end()) return it->second;
      }
      raise(errc::unbound_variable, "constant " + e->name + " is not defined");
    }
    case expr_op::neg: return -eval_num_rec(e->lhs, env);
    case expr_op::abs_fn: return std::fabs(eval_num_rec(e->lhs, env));
    case expr_op::sgn_fn: return eval_num_rec(e->lhs, env) >= 0.0 ? 1.0 : -1.0;
    case expr_op::sqrt_fn: {
      double a = eval_num_rec(e->lhs, env);
      if (a < 0.0) raise(errc::domain_error, "sqrt of a negative number");
      return std::sqrt(a);
    }
    case expr_op::exp_fn: {
      double r = std::exp(eval_num_rec(e->lhs, env));
      if (!std::isfinite(r)) raise(errc::domain_error, "exp overflow");
      return r;
    }
    case expr_op::ln_fn: {
      double a = eval_num_rec(e->lhs, env);
      if (a <= 0.0) raise(errc::domain_error, "ln of a non-positive number");
      return std::log(a);
    }
    case expr_op::ceil_fn: return std::ceil(eval_num_rec(e->lhs, env));
    case expr_op::add: return eval_num_rec(e->lhs, env) + eval_num_rec(e->rhs, env);
    case expr_op::sub: return eval_num_rec(e->lhs, env) - eval_num_rec(e->rhs, env);
    case expr_op::mul: return eval_num_rec(e->lhs, env) * eval_num_rec(e->rhs, env);
    case expr_op::divide: {
      double a = eval_num_rec(e->lhs, env);
      double b = eval_num_rec(e->rhs, env);
      if (b == 0.0) raise(errc::domain_error, "division by zero");
      return a / b;
    }
    case expr_op::pow_fn: {
      double a = eval_num_rec(e->lhs, env);
      double b = eval_num_rec(e->rhs, env);
      double r = std::pow(a, b);
      if (!std::isfinite(r))
        raise(errc::domain_error, "pow produced a non-finite result");
      return r;
    }
    case expr_op::min_fn: return std::fmin(eval_num_rec(e->lhs, env), eval_num_rec(e->rhs, env));
    case expr_op::max_fn: return std::fmax(eval_num_rec(e->lhs, env), eval_num_rec(e->rhs, env));
    default:
      raise(errc::type_error, "expected a numeric expression");
  }
}

}  // namespace

EvalValue eval_expression(const Expr& e, const EvalEnv& env) {
  EvalValue v;
  v.type = e->type;
  if (e->type == expr_type::number)
    v.num = eval_num_rec(e, env);
  else
    v.truth = eval_bool_rec(e, env);
  return v;
}

double eval_number(const Expr& e, const EvalEnv& env) {
  if (e->type != expr_type::number)
    raise(errc::type_error, "expected a numeric expression");
  return eval_num_rec(e, env);
}

bool eval_boolean(const Expr& e, const EvalEnv& env) {
  if (e->type != expr_type::boolean)
    raise(errc::type_error, "expected a boolean expression");
  return eval_bool_rec(e, env);
}

Expr bind_constants(const Expr& e, const std::map<std::string, double>& constants) {
  if (e->op == expr_op::constant) {
    auto it = constants.find(e->name);
    if (it == constants.end())
      raise(errc::unbound_variable, "constant " + e->name + " is not defined");
    auto n = std::make_shared<ExprNode>(*e);
    n->op = expr_op::literal;
    n->value = it->second;
    n->lhs.reset();
    n->rhs.reset();
    return n;
  }
  if (!e->lhs) return e;
  auto n = std::make_shared<ExprNode>(*e);
  n->lhs = bind_constants(e->lhs, constants);
  if (e->rhs) n->rhs = bind_constants(e->rhs, constants);
  return n;
}

void check_dimension(const Expr& e, int dim) {
  if (!e) return;
  if (e->op == expr_op::variable && e->index >= dim)
    raise(errc::unbound_variable,
          "variable " + e->name + " exceeds the system dimension " + std::to_string(dim));
  check_dimension(e->lhs, dim);
  check_dimension(e->rhs, dim);
}

expr_type type_of(const Expr& e) { return e->type; }

}  // namespace hyltl
