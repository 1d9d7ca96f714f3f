#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "intertwine/types.hpp"

namespace intertwine {

/// Immutable expression tree for functions R -> C, closed under
/// differentiation. Construction goes through the smart constructors below,
/// which fold constants, flatten sums/products and merge like terms so that
/// repeated differentiation stays bounded.
class Expr {
 public:
  enum class Kind { Constant, Variable, Add, Mul, Div, Neg, Pow, Exp, Sin, Cos, Sinh, Cosh };

  struct Node;

  Expr();  // constant zero
  Expr(Complex value);  // NOLINT(google-explicit-constructor)
  Expr(double value);   // NOLINT(google-explicit-constructor)

  static Expr variable();

  Kind kind() const;
  /// Value of a Constant node.
  Complex value() const;
  /// Exponent of a Pow node.
  int exponent() const;
  const std::vector<Expr>& children() const;

  bool is_constant() const { return kind() == Kind::Constant; }
  bool is_zero() const;
  /// True when the tree contains no Variable node.
  bool is_closed() const;

  std::size_t hash() const;
  std::size_t size() const;  // node count

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend Expr make_node(Kind, std::vector<Expr>, Complex, int);
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

Expr pow(const Expr& base, int exponent);
Expr exp(const Expr& arg);
Expr sin(const Expr& arg);
Expr cos(const Expr& arg);
Expr sinh(const Expr& arg);
Expr cosh(const Expr& arg);

/// Exact symbolic derivative d/dx.
Expr differentiate(const Expr& e);
/// k-fold derivative.
Expr differentiate(const Expr& e, int times);

/// Pointwise complex evaluation. Throws DivisionByZero when a denominator
/// vanishes at x.
Complex evaluate(const Expr& e, double x);

/// Parses the scenario expression grammar. Throws SyntaxError.
Expr parse(std::string_view text);

/// Renders an expression in the grammar accepted by parse().
std::string to_string(const Expr& e);

}  // namespace intertwine
