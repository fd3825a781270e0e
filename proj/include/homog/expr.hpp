#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace homog {

/// Real-valued scalar expression over the slow variables x1..x9 and the fast
/// variables xi1..xi9.
///
/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := number | 'pi' | var | func '(' expr ')' | '(' expr ')' | '-' factor
///   var    := 'x' digit | 'xi' digit
///   func   := 'sin' | 'cos' | 'exp'
///
/// A fast variable may only occur inside a phase 2*pi*(k1*xi1 + ... + kd*xid) + c(x)
/// with integer k's that is the argument of sin or cos, so every parsed
/// expression is 1-periodic in each xi component by construction.
///
/// Expressions are immutable and cheap to copy (shared tree).
class Expr {
 public:
  struct Node;

  /// The constant 0.
  Expr();

  static Expr constant(double value);

  /// Evaluates at (x, xi). The caller reduces xi modulo 1; the value does not
  /// depend on that reduction except through floating-point rounding.
  [[nodiscard]] double evaluate(std::span<const double> x, std::span<const double> xi) const;

  /// Fully parenthesized source text with round-trip precision literals.
  [[nodiscard]] std::string serialize() const;

  /// Highest 1-based index of an x (resp. xi) variable, 0 if none occurs.
  [[nodiscard]] int max_x_index() const;
  [[nodiscard]] int max_xi_index() const;

  [[nodiscard]] bool depends_on_x() const { return max_x_index() > 0; }
  [[nodiscard]] bool depends_on_xi() const { return max_xi_index() > 0; }

  /// True for a literal zero (the default-constructed expression or "0").
  [[nodiscard]] bool is_zero_literal() const;

 private:
  explicit Expr(std::shared_ptr<const Node> root);
  friend Expr parse_expr(std::string_view source);

  std::shared_ptr<const Node> root_;
};

/// Parses source text. Throws ParseError on malformed input and
/// PeriodicityError when a fast variable escapes a periodic construct.
Expr parse_expr(std::string_view source);

}  // namespace homog
