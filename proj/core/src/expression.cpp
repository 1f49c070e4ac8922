#include "hbgfdi/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace hbgfdi {

namespace {

std::shared_ptr<const ExprNode> make_node(ExprNode n) {
  return std::make_shared<const ExprNode>(std::move(n));
}

int kind_rank(ExprKind k) {
  switch (k) {
    case ExprKind::Const: return 0;
    case ExprKind::Param: return 1;
    case ExprKind::Signal: return 2;
    case ExprKind::ModeBool: return 3;
    case ExprKind::Sum: return 4;
    case ExprKind::Product: return 5;
    case ExprKind::Reciprocal: return 6;
    case ExprKind::TimeDeriv: return 7;
    case ExprKind::MaxConst: return 8;
    case ExprKind::SignOf: return 9;
    case ExprKind::AbsOf: return 10;
    case ExprKind::Neg: return 11;
  }
  return 99;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

Expr Expr::constant(double v) {
  return Expr(make_node({ExprKind::Const, v, {}, {}, {}}));
}
Expr Expr::param(std::string name) {
  return Expr(make_node({ExprKind::Param, 0.0, std::move(name), {}, {}}));
}
Expr Expr::signal(std::string name) {
  return Expr(make_node({ExprKind::Signal, 0.0, std::move(name), {}, {}}));
}
Expr Expr::mode_bool(std::string name) {
  return Expr(make_node({ExprKind::ModeBool, 0.0, std::move(name), {}, {}}));
}
Expr Expr::sum(std::vector<Expr> children, std::vector<int> signs) {
  if (children.size() != signs.size())
    throw ExprError("sum: children/signs size mismatch");
  return Expr(make_node({ExprKind::Sum, 0.0, {}, std::move(children), std::move(signs)}));
}
Expr Expr::product(std::vector<Expr> children) {
  return Expr(make_node({ExprKind::Product, 0.0, {}, std::move(children), {}}));
}
Expr Expr::reciprocal(Expr child) {
  return Expr(make_node({ExprKind::Reciprocal, 0.0, {}, {std::move(child)}, {}}));
}
Expr Expr::time_deriv(Expr signal_child) {
  if (signal_child.kind() != ExprKind::Signal)
    throw ExprError("time_deriv applies only to measured signals");
  return Expr(make_node({ExprKind::TimeDeriv, 0.0, {}, {std::move(signal_child)}, {}}));
}
Expr Expr::max_const(Expr child, double clamp) {
  return Expr(make_node({ExprKind::MaxConst, clamp, {}, {std::move(child)}, {}}));
}
Expr Expr::sign_of(Expr child) {
  return Expr(make_node({ExprKind::SignOf, 0.0, {}, {std::move(child)}, {}}));
}
Expr Expr::abs_of(Expr child) {
  return Expr(make_node({ExprKind::AbsOf, 0.0, {}, {std::move(child)}, {}}));
}
Expr Expr::negate(Expr child) {
  return Expr(make_node({ExprKind::Neg, 0.0, {}, {std::move(child)}, {}}));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}, {+1, +1}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, b}, {+1, -1}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
Expr operator-(const Expr& a) { return Expr::negate(a); }

int compare(const Expr& a, const Expr& b) {
  const ExprNode& na = a.node();
  const ExprNode& nb = b.node();
  if (na.kind != nb.kind)
    return kind_rank(na.kind) < kind_rank(nb.kind) ? -1 : 1;
  if (na.name != nb.name) return na.name < nb.name ? -1 : 1;
  if (na.value != nb.value) return na.value < nb.value ? -1 : 1;
  if (na.children.size() != nb.children.size())
    return na.children.size() < nb.children.size() ? -1 : 1;
  for (size_t i = 0; i < na.children.size(); ++i) {
    int c = compare(na.children[i], nb.children[i]);
    if (c != 0) return c;
  }
  if (na.kind == ExprKind::Sum) {
    for (size_t i = 0; i < na.signs.size(); ++i) {
      if (na.signs[i] != nb.signs[i]) return na.signs[i] > nb.signs[i] ? -1 : 1;
    }
  }
  return 0;
}

bool structurally_equal(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

namespace {

struct SignedTerm {
  Expr term;
  int sign;
};

Expr simplify_impl(const Expr& e);

// Flattens a (sign, expr) pair into sum terms, recursing through nested
// sums and Neg wrappers. `expr` is already simplified.
void collect_sum_terms(const Expr& expr, int sign, std::vector<SignedTerm>& out) {
  const ExprNode& n = expr.node();
  if (n.kind == ExprKind::Sum) {
    for (size_t i = 0; i < n.children.size(); ++i)
      collect_sum_terms(n.children[i], sign * n.signs[i], out);
    return;
  }
  if (n.kind == ExprKind::Neg) {
    collect_sum_terms(n.children[0], -sign, out);
    return;
  }
  out.push_back({expr, sign});
}

void collect_product_factors(const Expr& expr, std::vector<Expr>& out, int& sign) {
  const ExprNode& n = expr.node();
  if (n.kind == ExprKind::Product) {
    for (const Expr& c : n.children) collect_product_factors(c, out, sign);
    return;
  }
  if (n.kind == ExprKind::Neg) {
    sign = -sign;
    collect_product_factors(n.children[0], out, sign);
    return;
  }
  out.push_back(expr);
}

Expr simplify_sum(const std::vector<Expr>& children, const std::vector<int>& signs) {
  std::vector<SignedTerm> terms;
  for (size_t i = 0; i < children.size(); ++i)
    collect_sum_terms(simplify_impl(children[i]), signs[i], terms);

  double const_acc = 0.0;
  std::vector<SignedTerm> kept;
  for (const SignedTerm& t : terms) {
    if (t.term.kind() == ExprKind::Const) {
      const_acc += t.sign * t.term.node().value;
    } else {
      kept.push_back(t);
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const SignedTerm& a, const SignedTerm& b) {
    int c = compare(a.term, b.term);
    if (c != 0) return c < 0;
    return a.sign > b.sign;
  });
  if (const_acc != 0.0) kept.push_back({Expr::constant(const_acc), +1});

  if (kept.empty()) return Expr::constant(0.0);
  if (kept.size() == 1 && kept[0].sign > 0) return kept[0].term;

  std::vector<Expr> cs;
  std::vector<int> ss;
  cs.reserve(kept.size());
  for (const SignedTerm& t : kept) {
    cs.push_back(t.term);
    ss.push_back(t.sign);
  }
  return Expr::sum(std::move(cs), std::move(ss));
}

Expr simplify_product(const std::vector<Expr>& children) {
  std::vector<Expr> factors;
  int sign = +1;
  for (const Expr& c : children) collect_product_factors(simplify_impl(c), factors, sign);

  double const_acc = sign;
  std::vector<Expr> kept;
  for (const Expr& f : factors) {
    if (f.kind() == ExprKind::Const) {
      const_acc *= f.node().value;
    } else {
      kept.push_back(f);
    }
  }
  if (const_acc == 0.0) return Expr::constant(0.0);

  // Boolean idempotence: a mode switch squared is the switch itself.
  std::vector<Expr> dedup;
  for (const Expr& f : kept) {
    if (f.kind() == ExprKind::ModeBool) {
      bool seen = false;
      for (const Expr& d : dedup)
        if (d.kind() == ExprKind::ModeBool && d.node().name == f.node().name) {
          seen = true;
          break;
        }
      if (seen) continue;
    }
    dedup.push_back(f);
  }

  // sign(x)*x -> |x| on syntactically identical operands.
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < dedup.size() && !changed; ++i) {
      if (dedup[i].kind() != ExprKind::SignOf) continue;
      for (size_t j = 0; j < dedup.size(); ++j) {
        if (j == i) continue;
        if (structurally_equal(dedup[i].node().children[0], dedup[j])) {
          Expr abs = Expr::abs_of(dedup[j]);
          std::vector<Expr> next;
          for (size_t k = 0; k < dedup.size(); ++k)
            if (k != i && k != j) next.push_back(dedup[k]);
          next.push_back(abs);
          dedup = std::move(next);
          changed = true;
          break;
        }
      }
    }
  }

  std::stable_sort(dedup.begin(), dedup.end(),
                   [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });

  if (dedup.empty()) return Expr::constant(const_acc);
  Expr core = dedup.size() == 1 ? dedup[0] : Expr::product(dedup);
  if (const_acc == 1.0) return core;
  if (const_acc == -1.0) return Expr::sum({core}, {-1});
  std::vector<Expr> cs{Expr::constant(std::abs(const_acc))};
  for (const Expr& d : dedup) cs.push_back(d);
  Expr scaled = Expr::product(std::move(cs));
  if (const_acc < 0.0) return Expr::sum({scaled}, {-1});
  return scaled;
}

Expr simplify_impl(const Expr& e) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprKind::Const:
    case ExprKind::Param:
    case ExprKind::Signal:
    case ExprKind::ModeBool:
    case ExprKind::TimeDeriv:
      return e;
    case ExprKind::Sum:
      return simplify_sum(n.children, n.signs);
    case ExprKind::Product:
      return simplify_product(n.children);
    case ExprKind::Neg: {
      Expr c = simplify_impl(n.children[0]);
      if (c.kind() == ExprKind::Const) return Expr::constant(-c.node().value);
      return simplify_sum({c}, {-1});
    }
    case ExprKind::Reciprocal: {
      Expr c = simplify_impl(n.children[0]);
      if (c.kind() == ExprKind::Const) {
        if (c.node().value == 0.0) throw ExprError("reciprocal of zero constant");
        return Expr::constant(1.0 / c.node().value);
      }
      if (c.kind() == ExprKind::Reciprocal) return c.node().children[0];
      return Expr::reciprocal(c);
    }
    case ExprKind::MaxConst: {
      Expr c = simplify_impl(n.children[0]);
      if (c.kind() == ExprKind::Const)
        return Expr::constant(std::max(c.node().value, n.value));
      return Expr::max_const(c, n.value);
    }
    case ExprKind::SignOf: {
      Expr c = simplify_impl(n.children[0]);
      if (c.kind() == ExprKind::Const) {
        double v = c.node().value;
        return Expr::constant(v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0));
      }
      return Expr::sign_of(c);
    }
    case ExprKind::AbsOf: {
      Expr c = simplify_impl(n.children[0]);
      if (c.kind() == ExprKind::Const) return Expr::constant(std::abs(c.node().value));
      if (c.kind() == ExprKind::AbsOf) return c;
      return Expr::abs_of(c);
    }
  }
  return e;
}

}  // namespace

Expr simplify(const Expr& e) { return simplify_impl(e); }

double evaluate(const Expr& e, const Valuation& v) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprKind::Const:
      return n.value;
    case ExprKind::Param: {
      auto it = v.params.find(n.name);
      if (it == v.params.end()) throw UnresolvedSymbolError("unresolved parameter: " + n.name);
      return it->second;
    }
    case ExprKind::Signal: {
      auto it = v.signals.find(n.name);
      if (it == v.signals.end()) throw UnresolvedSymbolError("unresolved signal: " + n.name);
      return it->second;
    }
    case ExprKind::ModeBool: {
      auto it = v.modes.find(n.name);
      if (it == v.modes.end()) throw UnresolvedSymbolError("unresolved mode: " + n.name);
      if (it->second != 0 && it->second != 1)
        throw ExprError("mode value out of {0,1}: " + n.name);
      return static_cast<double>(it->second);
    }
    case ExprKind::Sum: {
      double acc = 0.0;
      for (size_t i = 0; i < n.children.size(); ++i)
        acc += n.signs[i] * evaluate(n.children[i], v);
      return acc;
    }
    case ExprKind::Product: {
      double acc = 1.0;
      for (const Expr& c : n.children) acc *= evaluate(c, v);
      return acc;
    }
    case ExprKind::Reciprocal:
      return 1.0 / evaluate(n.children[0], v);
    case ExprKind::TimeDeriv: {
      const std::string& name = n.children[0].node().name;
      auto it = v.signal_derivs.find(name);
      if (it == v.signal_derivs.end())
        throw UnresolvedSymbolError("unresolved signal derivative: " + name);
      return it->second;
    }
    case ExprKind::MaxConst:
      return std::max(evaluate(n.children[0], v), n.value);
    case ExprKind::SignOf: {
      double x = evaluate(n.children[0], v);
      return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    }
    case ExprKind::AbsOf:
      return std::abs(evaluate(n.children[0], v));
    case ExprKind::Neg:
      return -evaluate(n.children[0], v);
  }
  throw ExprError("unreachable expression kind");
}

namespace {

void collect_symbols(const Expr& e, FreeSymbols& out) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprKind::Param: out.params.insert(n.name); return;
    case ExprKind::Signal: out.signals.insert(n.name); return;
    case ExprKind::ModeBool: out.modes.insert(n.name); return;
    default:
      for (const Expr& c : n.children) collect_symbols(c, out);
  }
}

}  // namespace

FreeSymbols free_symbols(const Expr& e) {
  FreeSymbols out;
  collect_symbols(e, out);
  return out;
}

Expr substitute_modes(const Expr& e, const std::map<std::string, int>& modes) {
  const ExprNode& n = e.node();
  if (n.kind == ExprKind::ModeBool) {
    auto it = modes.find(n.name);
    if (it == modes.end()) return e;
    return Expr::constant(static_cast<double>(it->second));
  }
  if (n.children.empty()) return e;
  std::vector<Expr> children;
  children.reserve(n.children.size());
  for (const Expr& c : n.children) children.push_back(substitute_modes(c, modes));
  switch (n.kind) {
    case ExprKind::Sum: return Expr::sum(std::move(children), n.signs);
    case ExprKind::Product: return Expr::product(std::move(children));
    case ExprKind::Reciprocal: return Expr::reciprocal(children[0]);
    case ExprKind::TimeDeriv: return Expr::time_deriv(children[0]);
    case ExprKind::MaxConst: return Expr::max_const(children[0], n.value);
    case ExprKind::SignOf: return Expr::sign_of(children[0]);
    case ExprKind::AbsOf: return Expr::abs_of(children[0]);
    case ExprKind::Neg: return Expr::negate(children[0]);
    default: return e;
  }
}

namespace {

bool is_coefficient_leaf(const Expr& e) {
  ExprKind k = e.kind();
  return k == ExprKind::Const || k == ExprKind::Param || k == ExprKind::ModeBool;
}

std::string render_impl(const Expr& e);

std::string render_factor(const Expr& e) {
  if (e.kind() == ExprKind::Sum || e.kind() == ExprKind::Neg)
    return "(" + render_impl(e) + ")";
  return render_impl(e);
}

// Products group constant-like numerators and reciprocal denominators into a
// single leading coefficient, so `a1 * 1/R12 * (x - y)` reads
// `(a1/R12)*(x - y)` and `1/R1 * De1` reads `(1/R1)*De1`.
std::string render_product(const ExprNode& n) {
  std::vector<std::string> numer, denom, rest;
  for (const Expr& c : n.children) {
    if (is_coefficient_leaf(c)) {
      numer.push_back(render_impl(c));
    } else if (c.kind() == ExprKind::Reciprocal &&
               is_coefficient_leaf(c.node().children[0])) {
      denom.push_back(render_impl(c.node().children[0]));
    } else {
      rest.push_back(render_factor(c));
    }
  }
  std::string coef;
  if (!denom.empty()) {
    coef = "(";
    if (numer.empty()) {
      coef += "1";
    } else {
      for (size_t i = 0; i < numer.size(); ++i) coef += (i ? "*" : "") + numer[i];
    }
    for (const std::string& d : denom) coef += "/" + d;
    coef += ")";
  } else if (!numer.empty()) {
    for (size_t i = 0; i < numer.size(); ++i) coef += (i ? "*" : "") + numer[i];
  }
  std::string out = coef;
  for (const std::string& r : rest) {
    if (!out.empty()) out += "*";
    out += r;
  }
  if (out.empty()) out = "1";
  return out;
}

std::string render_impl(const Expr& e) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprKind::Const: return format_real(n.value);
    case ExprKind::Param:
    case ExprKind::Signal:
    case ExprKind::ModeBool: return n.name;
    case ExprKind::Sum: {
      if (n.children.empty()) return "0";
      std::string out;
      for (size_t i = 0; i < n.children.size(); ++i) {
        const Expr& c = n.children[i];
        std::string t = (c.kind() == ExprKind::Sum) ? "(" + render_impl(c) + ")"
                                                    : render_impl(c);
        if (i == 0) {
          out = n.signs[i] < 0 ? "-" + t : t;
        } else {
          out += n.signs[i] < 0 ? " - " : " + ";
          out += t;
        }
      }
      return out;
    }
    case ExprKind::Product: return render_product(n);
    case ExprKind::Reciprocal:
      if (is_coefficient_leaf(n.children[0]))
        return "(1/" + render_impl(n.children[0]) + ")";
      return "(1/(" + render_impl(n.children[0]) + "))";
    case ExprKind::TimeDeriv: return "d/dt(" + n.children[0].node().name + ")";
    case ExprKind::MaxConst:
      return "max(" + render_impl(n.children[0]) + "," + format_real(n.value) + ")";
    case ExprKind::SignOf: return "sign(" + render_impl(n.children[0]) + ")";
    case ExprKind::AbsOf: return "abs(" + render_impl(n.children[0]) + ")";
    case ExprKind::Neg: return "-" + render_factor(n.children[0]);
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Infix parser for the render() format.

struct Token {
  enum Type { Ident, Number, Op, DDt, End } type;
  std::string text;
  double number = 0.0;
  size_t pos = 0;
};

class Lexer {
public:
  explicit Lexer(const std::string& s) : s_(s) {}

  Token next() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    size_t start = i_;
    if (i_ >= s_.size()) return {Token::End, "", 0.0, start};
    char c = s_[i_];
    if (s_.compare(i_, 5, "d/dt(") == 0) {
      i_ += 4;  // leave '(' for the parser
      return {Token::DDt, "d/dt", 0.0, start};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_ + 1])))) {
      size_t end = i_;
      while (end < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
              s_[end] == 'e' || s_[end] == 'E' ||
              ((s_[end] == '+' || s_[end] == '-') && (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
        ++end;
      std::string text = s_.substr(i_, end - i_);
      i_ = end;
      return {Token::Number, text, std::stod(text), start};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t end = i_;
      while (end < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_'))
        ++end;
      std::string text = s_.substr(i_, end - i_);
      i_ = end;
      return {Token::Ident, text, 0.0, start};
    }
    ++i_;
    return {Token::Op, std::string(1, c), 0.0, start};
  }

private:
  const std::string& s_;
  size_t i_ = 0;
};

class Parser {
public:
  Parser(const std::string& text, const SymbolTable& symbols)
      : lexer_(text), symbols_(symbols) {
    advance();
  }

  Expr parse() {
    Expr e = parse_sum();
    expect_end();
    return e;
  }

private:
  void advance() { tok_ = lexer_.next(); }

  bool accept_op(const std::string& op) {
    if (tok_.type == Token::Op && tok_.text == op) {
      advance();
      return true;
    }
    return false;
  }

  void expect_op(const std::string& op) {
    if (!accept_op(op)) fail("expected '" + op + "'");
  }

  void expect_end() {
    if (tok_.type != Token::End) fail("trailing input");
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ExprError("expression parse error at offset " + std::to_string(tok_.pos) +
                    ": " + msg);
  }

  Expr parse_sum() {
    std::vector<Expr> terms;
    std::vector<int> signs;
    int sign = +1;
    if (accept_op("-")) sign = -1;
    terms.push_back(parse_term());
    signs.push_back(sign);
    for (;;) {
      if (accept_op("+")) {
        terms.push_back(parse_term());
        signs.push_back(+1);
      } else if (accept_op("-")) {
        terms.push_back(parse_term());
        signs.push_back(-1);
      } else {
        break;
      }
    }
    if (terms.size() == 1 && signs[0] > 0) return terms[0];
    return Expr::sum(std::move(terms), std::move(signs));
  }

  Expr parse_term() {
    std::vector<Expr> factors{parse_factor()};
    for (;;) {
      if (accept_op("*")) {
        factors.push_back(parse_factor());
      } else if (accept_op("/")) {
        factors.push_back(Expr::reciprocal(parse_factor()));
      } else {
        break;
      }
    }
    if (factors.size() == 1) return factors[0];
    return Expr::product(std::move(factors));
  }

  Expr parse_factor() {
    if (accept_op("-")) return Expr::negate(parse_factor());
    if (accept_op("(")) {
      Expr e = parse_sum();
      expect_op(")");
      return e;
    }
    if (tok_.type == Token::Number) {
      double v = tok_.number;
      advance();
      return Expr::constant(v);
    }
    if (tok_.type == Token::DDt) {
      advance();
      expect_op("(");
      if (tok_.type != Token::Ident) fail("expected signal name in d/dt()");
      std::string name = tok_.text;
      advance();
      expect_op(")");
      return Expr::time_deriv(Expr::signal(std::move(name)));
    }
    if (tok_.type == Token::Ident) {
      std::string name = tok_.text;
      advance();
      if (name == "max") {
        expect_op("(");
        Expr arg = parse_sum();
        expect_op(",");
        if (tok_.type != Token::Number) fail("expected clamp constant in max()");
        double clamp = tok_.number;
        advance();
        expect_op(")");
        return Expr::max_const(arg, clamp);
      }
      if (name == "sign") {
        expect_op("(");
        Expr arg = parse_sum();
        expect_op(")");
        return Expr::sign_of(arg);
      }
      if (name == "abs") {
        expect_op("(");
        Expr arg = parse_sum();
        expect_op(")");
        return Expr::abs_of(arg);
      }
      if (symbols_.params.count(name)) return Expr::param(name);
      if (symbols_.modes.count(name)) return Expr::mode_bool(name);
      if (symbols_.signals.count(name)) return Expr::signal(name);
      throw UnresolvedSymbolError("unknown symbol in expression: " + name);
    }
    fail("unexpected token '" + tok_.text + "'");
  }

  Lexer lexer_;
  const SymbolTable& symbols_;
  Token tok_;
};

}  // namespace

std::string render(const Expr& e) { return render_impl(e); }

Expr parse_expression(const std::string& text, const SymbolTable& symbols) {
  Parser p(text, symbols);
  return p.parse();
}

}  // namespace hbgfdi
