#include "hyltl/ltl.hpp"

#include <algorithm>
#include <cmath>

namespace hyltl {

Formula make_atom(std::string name) {
  auto n = std::make_shared<FormulaNode>();
  n->op = ltl_op::atom;
  n->atom = std::move(name);
  return n;
}

Formula make_unary(ltl_op op, Formula f) {
  auto n = std::make_shared<FormulaNode>();
  n->op = op;
  n->lhs = std::move(f);
  return n;
}

Formula make_binary(ltl_op op, Formula l, Formula r) {
  auto n = std::make_shared<FormulaNode>();
  n->op = op;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct FTok {
  enum Kind { atom_name, bang, amp, pipe, arrow, darrow, lparen, rparen, end } kind;
  std::string text;
  std::size_t pos = 0;
};

class FLexer {
public:
  explicit FLexer(std::string_view src) : src_(src) { advance(); }
  const FTok& peek() const { return tok_; }
  FTok take() {
    FTok t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = FTok{FTok::end, "", pos_};
    if (pos_ >= src_.size()) return;
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = FTok::atom_name;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    switch (c) {
      case '!': tok_.kind = FTok::bang; ++pos_; return;
      case '&': tok_.kind = FTok::amp; ++pos_; return;
      case '|': tok_.kind = FTok::pipe; ++pos_; return;
      case '(': tok_.kind = FTok::lparen; ++pos_; return;
      case ')': tok_.kind = FTok::rparen; ++pos_; return;
      case '-':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
          tok_.kind = FTok::arrow;
          pos_ += 2;
          return;
        }
        raise(errc::syntax_error, "expected '->'", pos_);
      case '<':
        if (pos_ + 2 < src_.size() + 1 && src_.substr(pos_, 3) == "<->") {
          tok_.kind = FTok::darrow;
          pos_ += 3;
          return;
        }
        raise(errc::syntax_error, "expected '<->'", pos_);
      default:
        raise(errc::syntax_error, std::string("unexpected character '") + c + "'", pos_);
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  FTok tok_;
};

bool is_unary_keyword(const std::string& s, ltl_op& op) {
  if (s == "X" || s == "next") { op = ltl_op::next; return true; }
  if (s == "F" || s == "eventually") { op = ltl_op::eventually; return true; }
  if (s == "G" || s == "always") { op = ltl_op::always; return true; }
  return false;
}

class FParser {
public:
  explicit FParser(std::string_view src) : lex_(src) {}

  Formula parse() {
    Formula f = parse_iff();
    const FTok& t = lex_.peek();
    if (t.kind != FTok::end) raise(errc::syntax_error, "unexpected trailing input", t.pos);
    return f;
  }

private:
  Formula parse_iff() {
    Formula l = parse_imp();
    if (lex_.peek().kind == FTok::darrow) {
      lex_.take();
      return make_binary(ltl_op::equivalence, std::move(l), parse_iff());
    }
    return l;
  }

  Formula parse_imp() {
    Formula l = parse_or();
    if (lex_.peek().kind == FTok::arrow) {
      lex_.take();
      return make_binary(ltl_op::implication, std::move(l), parse_imp());
    }
    return l;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (lex_.peek().kind == FTok::pipe) {
      lex_.take();
      f = make_binary(ltl_op::disjunction, std::move(f), parse_and());
    }
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (lex_.peek().kind == FTok::amp) {
      lex_.take();
      f = make_binary(ltl_op::conjunction, std::move(f), parse_until());
    }
    return f;
  }

  Formula parse_until() {
    Formula l = parse_unary();
    const FTok& t = lex_.peek();
    if (t.kind == FTok::atom_name && (t.text == "U" || t.text == "W")) {
      bool strong = t.text == "U";
      lex_.take();
      return make_binary(strong ? ltl_op::until_strong : ltl_op::until_weak, std::move(l),
                         parse_until());
    }
    return l;
  }

  Formula parse_unary() {
    FTok t = lex_.take();
    switch (t.kind) {
      case FTok::bang:
        return make_unary(ltl_op::negation, parse_unary());
      case FTok::lparen: {
        Formula f = parse_iff();
        FTok close = lex_.take();
        if (close.kind != FTok::rparen) raise(errc::syntax_error, "expected ')'", close.pos);
        return f;
      }
      case FTok::atom_name: {
        ltl_op op;
        if (is_unary_keyword(t.text, op)) return make_unary(op, parse_unary());
        if (t.text == "U" || t.text == "W")
          raise(errc::syntax_error, "'" + t.text + "' is an operator, not an atom", t.pos);
        return make_atom(std::move(t.text));
      }
      case FTok::end:
        raise(errc::syntax_error, "unexpected end of input", t.pos);
      default:
        raise(errc::syntax_error, "expected an atom, unary operator or '('", t.pos);
    }
  }

  FLexer lex_;
};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

int fprec(ltl_op op) {
  switch (op) {
    case ltl_op::equivalence: return 1;
    case ltl_op::implication: return 2;
    case ltl_op::disjunction: return 3;
    case ltl_op::conjunction: return 4;
    case ltl_op::until_strong:
    case ltl_op::until_weak: return 5;
    case ltl_op::negation:
    case ltl_op::next:
    case ltl_op::eventually:
    case ltl_op::always: return 6;
    case ltl_op::atom: return 7;
  }
  return 7;
}

void print_node(const Formula& f, std::string& out);

void print_child(const Formula& f, int min_prec, std::string& out) {
  if (fprec(f->op) < min_prec) {
    out += '(';
    print_node(f, out);
    out += ')';
  } else {
    print_node(f, out);
  }
}

void print_node(const Formula& f, std::string& out) {
  int p = fprec(f->op);
  switch (f->op) {
    case ltl_op::atom: out += f->atom; return;
    case ltl_op::negation:
      out += '!';
      print_child(f->lhs, p, out);
      return;
    case ltl_op::next:
      out += "X ";
      print_child(f->lhs, p, out);
      return;
    case ltl_op::eventually:
      out += "F ";
      print_child(f->lhs, p, out);
      return;
    case ltl_op::always:
      out += "G ";
      print_child(f->lhs, p, out);
      return;
    case ltl_op::conjunction:  // left associative
      print_child(f->lhs, p, out);
      out += " & ";
      print_child(f->rhs, p + 1, out);
      return;
    case ltl_op::disjunction:
      print_child(f->lhs, p, out);
      out += " | ";
      print_child(f->rhs, p + 1, out);
      return;
    case ltl_op::until_strong:  // right associative
    case ltl_op::until_weak:
      print_child(f->lhs, p + 1, out);
      out += f->op == ltl_op::until_strong ? " U " : " W ";
      print_child(f->rhs, p, out);
      return;
    case ltl_op::implication:
      print_child(f->lhs, p + 1, out);
      out += " -> ";
      print_child(f->rhs, p, out);
      return;
    case ltl_op::equivalence:
      print_child(f->lhs, p + 1, out);
      out += " <-> ";
      print_child(f->rhs, p, out);
      return;
  }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

// Truth tables over the flattened sample list, computed bottom-up. Sample i+1
// follows sample i in hybrid-time order; `next_ok[i]` marks pre-jump samples,
// i.e. points where (t, j+1) is also in the domain.
struct Evaluator {
  const HybridArc& arc;
  const PropositionSet& props;
  std::vector<char> next_ok;

  explicit Evaluator(const HybridArc& a, const PropositionSet& p) : arc(a), props(p) {
    const std::size_t n = arc.sample_count();
    next_ok.assign(n, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      auto cur = arc.sample(i);
      auto nxt = arc.sample(i + 1);
      if (nxt.j == cur.j + 1 && std::fabs(nxt.t - cur.t) <= 1e-12 * (1.0 + std::fabs(cur.t)))
        next_ok[i] = 1;
    }
  }

  std::vector<char> table(const Formula& f) const {
    const std::size_t n = arc.sample_count();
    std::vector<char> v(n, 0);
    switch (f->op) {
      case ltl_op::atom: {
        const Predicate& pred = props.predicate(f->atom);
        for (std::size_t i = 0; i < n; ++i) v[i] = pred(*arc.sample(i).x) ? 1 : 0;
        return v;
      }
      case ltl_op::negation: {
        auto a = table(f->lhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = !a[i];
        return v;
      }
      case ltl_op::conjunction: {
        auto a = table(f->lhs), b = table(f->rhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i] && b[i];
        return v;
      }
      case ltl_op::disjunction: {
        auto a = table(f->lhs), b = table(f->rhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i] || b[i];
        return v;
      }
      case ltl_op::implication: {
        auto a = table(f->lhs), b = table(f->rhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = !a[i] || b[i];
        return v;
      }
      case ltl_op::equivalence: {
        auto a = table(f->lhs), b = table(f->rhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i] == b[i];
        return v;
      }
      case ltl_op::next: {
        auto a = table(f->lhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = next_ok[i] && a[i + 1];
        return v;
      }
      case ltl_op::eventually: {
        auto a = table(f->lhs);
        char acc = 0;
        for (std::size_t i = n; i-- > 0;) {
          acc = acc || a[i];
          v[i] = acc;
        }
        return v;
      }
      case ltl_op::always: {
        auto a = table(f->lhs);
        char acc = 1;
        for (std::size_t i = n; i-- > 0;) {
          acc = acc && a[i];
          v[i] = acc;
        }
        return v;
      }
      case ltl_op::until_strong: {
        auto p = table(f->lhs), q = table(f->rhs);
        char acc = 0;
        for (std::size_t i = n; i-- > 0;) {
          acc = q[i] || (p[i] && acc);
          v[i] = acc;
        }
        return v;
      }
      case ltl_op::until_weak: {
        auto p = table(f->lhs), q = table(f->rhs);
        char until_acc = 0, always_acc = 1;
        for (std::size_t i = n; i-- > 0;) {
          until_acc = q[i] || (p[i] && until_acc);
          always_acc = always_acc && p[i];
          v[i] = until_acc || always_acc;
        }
        return v;
      }
    }
    return v;
  }
};

std::size_t sample_index_or_throw(const HybridArc& arc, HybridTime at) {
  auto idx = arc.sample_index(at);
  if (!idx)
    raise(errc::not_a_sample, "(" + std::to_string(at.t) + ", " + std::to_string(at.j) +
                                  ") is not a sample point of the arc");
  return *idx;
}

}  // namespace

Formula parse_formula(std::string_view text) { return FParser(text).parse(); }

std::string print_formula(const Formula& f) {
  std::string out;
  print_node(f, out);
  return out;
}

bool formula_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->atom != b->atom) return false;
  if (static_cast<bool>(a->lhs) != static_cast<bool>(b->lhs)) return false;
  if (a->lhs && !formula_equal(a->lhs, b->lhs)) return false;
  if (static_cast<bool>(a->rhs) != static_cast<bool>(b->rhs)) return false;
  return !a->rhs || formula_equal(a->rhs, b->rhs);
}

std::vector<std::string> formula_atoms(const Formula& f) {
  std::vector<std::string> out;
  auto walk = [&](auto&& self, const Formula& g) -> void {
    if (!g) return;
    if (g->op == ltl_op::atom) out.push_back(g->atom);
    self(self, g->lhs);
    self(self, g->rhs);
  };
  walk(walk, f);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool evaluate(const Formula& f, const HybridArc& arc, const PropositionSet& props,
              HybridTime at) {
  std::size_t idx = sample_index_or_throw(arc, at);
  Evaluator ev(arc, props);
  return ev.table(f)[idx] != 0;
}

CheckResult evaluate_with_witness(const Formula& f, const HybridArc& arc,
                                  const PropositionSet& props, HybridTime at) {
  std::size_t idx = sample_index_or_throw(arc, at);
  Evaluator ev(arc, props);
  CheckResult r;
  r.value = ev.table(f)[idx] != 0;

  auto point_of = [&](std::size_t i) {
    auto s = arc.sample(i);
    return HybridTime{s.t, s.j};
  };
  const std::size_t n = arc.sample_count();

  switch (f->op) {
    case ltl_op::eventually: {
      if (!r.value) break;
      auto a = ev.table(f->lhs);
      for (std::size_t i = idx; i < n; ++i)
        if (a[i]) {
          r.point = point_of(i);
          r.note = "witness sample satisfying the operand";
          break;
        }
      break;
    }
    case ltl_op::until_strong: {
      if (!r.value) break;
      auto p = ev.table(f->lhs), q = ev.table(f->rhs);
      for (std::size_t i = idx; i < n; ++i) {
        if (q[i]) {
          r.point = point_of(i);
          r.note = "witness sample satisfying the right operand";
          break;
        }
        if (!p[i]) break;
      }
      break;
    }
    case ltl_op::next: {
      if (r.value) {
        r.point = point_of(idx + 1);
        r.note = "post-jump sample";
      } else if (!ev.next_ok[idx]) {
        r.note = "(t, j+1) is not in the domain";
      } else {
        r.point = point_of(idx + 1);
        r.note = "counterexample: operand fails at the post-jump sample";
      }
      break;
    }
    case ltl_op::always: {
      if (r.value) break;
      auto a = ev.table(f->lhs);
      for (std::size_t i = idx; i < n; ++i)
        if (!a[i]) {
          r.point = point_of(i);
          r.note = "first counterexample sample";
          break;
        }
      break;
    }
    case ltl_op::until_weak: {
      if (r.value) break;
      auto p = ev.table(f->lhs), q = ev.table(f->rhs);
      for (std::size_t i = idx; i < n; ++i) {
        if (q[i]) break;  // cannot happen when the formula is false
        if (!p[i]) {
          r.point = point_of(i);
          r.note = "left operand fails before any witness of the right operand";
          break;
        }
      }
      break;
    }
    default:
      break;
  }
  return r;
}

bool holds_for_all_times(const Formula& f, const HybridArc& arc,
                         const PropositionSet& props) {
  Evaluator ev(arc, props);
  auto v = ev.table(f);
  return std::all_of(v.begin(), v.end(), [](char c) { return c != 0; });
}

bool is_sc_fragment(const Formula& f) {
  if (!f) return false;
  switch (f->op) {
    case ltl_op::atom: return true;
    case ltl_op::negation: return f->lhs->op == ltl_op::atom;
    case ltl_op::conjunction:
    case ltl_op::disjunction:
    case ltl_op::until_strong: return is_sc_fragment(f->lhs) && is_sc_fragment(f->rhs);
    case ltl_op::next:
    case ltl_op::eventually: return is_sc_fragment(f->lhs);
    default: return false;
  }
}

}  // namespace hyltl
