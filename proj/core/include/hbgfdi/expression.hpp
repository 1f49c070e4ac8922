#pragma once

// Symbolic expression trees over sensor signals, source signals, component
// parameters and boolean mode switches. The node set is exactly what the
// residual relations of a switched tank network need: sums with signs,
// products, reciprocals, time derivatives of measured signals, max-with-a-
// constant clamps, sign and absolute value.
//
// Expressions are immutable values; every operation returns a new tree.
// Deterministic canonical ordering makes structural equality decidable.

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hbgfdi {

enum class ExprKind {
  Const,
  Param,
  Signal,
  ModeBool,
  Sum,
  Product,
  Reciprocal,
  TimeDeriv,
  MaxConst,
  SignOf,
  AbsOf,
  Neg,
};

class Expr;

struct ExprNode {
  ExprKind kind;
  double value = 0.0;        // Const value, MaxConst clamp level
  std::string name;          // Param / Signal / ModeBool
  std::vector<Expr> children;
  std::vector<int> signs;    // Sum only, +1/-1 per child
};

/// Immutable handle to a shared expression node.
class Expr {
public:
  Expr() = default;

  static Expr constant(double v);
  static Expr param(std::string name);
  static Expr signal(std::string name);
  static Expr mode_bool(std::string name);
  static Expr sum(std::vector<Expr> children, std::vector<int> signs);
  static Expr product(std::vector<Expr> children);
  static Expr reciprocal(Expr child);
  /// Time derivative of a measured signal. Throws if the child is not a
  /// plain Signal node: relations never differentiate parameters.
  static Expr time_deriv(Expr signal_child);
  static Expr max_const(Expr child, double clamp);
  static Expr sign_of(Expr child);
  static Expr abs_of(Expr child);
  static Expr negate(Expr child);

  bool valid() const { return node_ != nullptr; }
  const ExprNode& node() const { return *node_; }
  ExprKind kind() const { return node_->kind; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ExprNode> node_;
};

/// Leaf bindings for numeric evaluation.
struct Valuation {
  std::map<std::string, double> params;
  std::map<std::string, int> modes;  // values restricted to {0,1}
  std::map<std::string, double> signals;
  std::map<std::string, double> signal_derivs;
};

struct FreeSymbols {
  std::set<std::string> params;
  std::set<std::string> modes;
  std::set<std::string> signals;
};

/// Total deterministic order on expressions; 0 means structurally equal.
int compare(const Expr& a, const Expr& b);
bool structurally_equal(const Expr& a, const Expr& b);

/// Canonical form: folds constants, drops 0/1 identities, rewrites
/// sign(x)*x into |x|, dedups repeated mode booleans in a product, flattens
/// nested sums/products and sorts commutative children deterministically.
/// Evaluation-equivalent to the input and idempotent.
Expr simplify(const Expr& e);

/// Recursive evaluation. sign(0) = 0, max_const(x,c) = max(x,c).
/// Throws std::out_of_range-derived UnresolvedSymbolError on missing names.
double evaluate(const Expr& e, const Valuation& v);

FreeSymbols free_symbols(const Expr& e);

/// Replaces mode booleans by the given 0/1 constants. Modes absent from the
/// map are left symbolic.
Expr substitute_modes(const Expr& e, const std::map<std::string, int>& modes);

/// Deterministic infix rendering, e.g.
///   Qp1 - C1*d/dt(De1) - (1/R1)*De1 - (a1/R12)*(max(De1,0.5) - max(De2,0.5))
std::string render(const Expr& e);

/// Symbol classification used by the expression parser.
struct SymbolTable {
  std::set<std::string> params;
  std::set<std::string> modes;
  std::set<std::string> signals;
};

/// Parses the infix format produced by render().
Expr parse_expression(const std::string& text, const SymbolTable& symbols);

class ExprError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnresolvedSymbolError : public ExprError {
public:
  using ExprError::ExprError;
};

}  // namespace hbgfdi
