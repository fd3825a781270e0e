#include "homog/expr.hpp"

#include "homog/common.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace homog {

enum class Op { Number, Pi, X, Xi, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp };

struct Expr::Node {
  Op op = Op::Number;
  double value = 0.0;
  int index = 0;  // 1-based variable index for X / Xi
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_leaf(Op op, double value = 0.0, int index = 0) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->value = value;
  n->index = index;
  return n;
}

NodePtr make_node(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

double eval(const Expr::Node& n, std::span<const double> x, std::span<const double> xi) {
  switch (n.op) {
    case Op::Number: return n.value;
    case Op::Pi: return kPi;
    case Op::X: return static_cast<std::size_t>(n.index) <= x.size() ? x[n.index - 1] : 0.0;
    case Op::Xi: return static_cast<std::size_t>(n.index) <= xi.size() ? xi[n.index - 1] : 0.0;
    case Op::Add: return eval(*n.lhs, x, xi) + eval(*n.rhs, x, xi);
    case Op::Sub: return eval(*n.lhs, x, xi) - eval(*n.rhs, x, xi);
    case Op::Mul: return eval(*n.lhs, x, xi) * eval(*n.rhs, x, xi);
    case Op::Div: return eval(*n.lhs, x, xi) / eval(*n.rhs, x, xi);
    case Op::Neg: return -eval(*n.lhs, x, xi);
    case Op::Sin: return std::sin(eval(*n.lhs, x, xi));
    case Op::Cos: return std::cos(eval(*n.lhs, x, xi));
    case Op::Exp: return std::exp(eval(*n.lhs, x, xi));
  }
  return 0.0;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (v < 0) return "(" + s + ")";
  return s;
}

std::string to_text(const Expr::Node& n) {
  switch (n.op) {
    case Op::Number: return format_number(n.value);
    case Op::Pi: return "pi";
    case Op::X: return "x" + std::to_string(n.index);
    case Op::Xi: return "xi" + std::to_string(n.index);
    case Op::Add: return "(" + to_text(*n.lhs) + " + " + to_text(*n.rhs) + ")";
    case Op::Sub: return "(" + to_text(*n.lhs) + " - " + to_text(*n.rhs) + ")";
    case Op::Mul: return "(" + to_text(*n.lhs) + " * " + to_text(*n.rhs) + ")";
    case Op::Div: return "(" + to_text(*n.lhs) + " / " + to_text(*n.rhs) + ")";
    case Op::Neg: return "(-" + to_text(*n.lhs) + ")";
    case Op::Sin: return "sin(" + to_text(*n.lhs) + ")";
    case Op::Cos: return "cos(" + to_text(*n.lhs) + ")";
    case Op::Exp: return "exp(" + to_text(*n.lhs) + ")";
  }
  return {};
}

int max_index(const Expr::Node& n, Op leaf) {
  if (n.op == leaf) return n.index;
  int m = 0;
  if (n.lhs) m = std::max(m, max_index(*n.lhs, leaf));
  if (n.rhs) m = std::max(m, max_index(*n.rhs, leaf));
  return m;
}

// ---------------------------------------------------------------------------
// Periodicity analysis: classifies every subtree as xi-free, periodic in xi,
// or a "phase" that is affine in xi with numeric coefficients.

struct Shape {
  enum Kind { Free, Periodic, Phase } kind = Free;
  bool constant = true;  // Free: no x dependence, `value` is known
  double value = 0.0;
  std::array<double, 9> coef{};
};

bool all_zero(const std::array<double, 9>& c) {
  for (double v : c) {
    if (v != 0.0) return false;
  }
  return true;
}

Shape free_shape(bool constant, double value = 0.0) {
  Shape s;
  s.kind = Shape::Free;
  s.constant = constant;
  s.value = value;
  return s;
}

Shape periodic_shape() {
  Shape s;
  s.kind = Shape::Periodic;
  s.constant = false;
  return s;
}

Shape normalize_phase(Shape s) {
  if (s.kind == Shape::Phase && all_zero(s.coef)) return free_shape(false);
  return s;
}

[[noreturn]] void bare_xi(const char* what) {
  throw PeriodicityError(std::string("fast variable outside sin/cos(2*pi*k*xi): ") + what);
}

Shape analyze(const Expr::Node& n);

Shape combine_additive(const Shape& a, const Shape& b, double sign) {
  using K = Shape::Kind;
  if (a.kind == K::Free && b.kind == K::Free) {
    return free_shape(a.constant && b.constant, a.value + sign * b.value);
  }
  if (a.kind == K::Phase || b.kind == K::Phase) {
    if (a.kind == K::Periodic || b.kind == K::Periodic) bare_xi("phase added to a periodic term");
    Shape s;
    s.kind = K::Phase;
    s.constant = false;
    for (int i = 0; i < 9; ++i) {
      const double ca = a.kind == K::Phase ? a.coef[i] : 0.0;
      const double cb = b.kind == K::Phase ? b.coef[i] : 0.0;
      s.coef[i] = ca + sign * cb;
    }
    return normalize_phase(s);
  }
  return periodic_shape();
}

Shape scale_phase(const Shape& phase, const Shape& factor, bool divide) {
  if (factor.kind != Shape::Free || !factor.constant) {
    bare_xi("phase multiplied by a non-constant factor");
  }
  if (divide && factor.value == 0.0) bare_xi("phase divided by zero");
  Shape s = phase;
  for (double& c : s.coef) c = divide ? c / factor.value : c * factor.value;
  return normalize_phase(s);
}

Shape analyze(const Expr::Node& n) {
  using K = Shape::Kind;
  switch (n.op) {
    case Op::Number: return free_shape(true, n.value);
    case Op::Pi: return free_shape(true, kPi);
    case Op::X: return free_shape(false);
    case Op::Xi: {
      Shape s;
      s.kind = K::Phase;
      s.constant = false;
      s.coef[n.index - 1] = 1.0;
      return s;
    }
    case Op::Neg: {
      Shape s = analyze(*n.lhs);
      if (s.kind == K::Free) s.value = -s.value;
      if (s.kind == K::Phase) {
        for (double& c : s.coef) c = -c;
      }
      return s;
    }
    case Op::Add: return combine_additive(analyze(*n.lhs), analyze(*n.rhs), 1.0);
    case Op::Sub: return combine_additive(analyze(*n.lhs), analyze(*n.rhs), -1.0);
    case Op::Mul:
    case Op::Div: {
      const bool divide = n.op == Op::Div;
      const Shape a = analyze(*n.lhs);
      const Shape b = analyze(*n.rhs);
      if (a.kind == K::Phase) return scale_phase(a, b, divide);
      if (b.kind == K::Phase) {
        if (divide) bare_xi("division by a phase");
        return scale_phase(b, a, false);
      }
      if (a.kind == K::Free && b.kind == K::Free) {
        return free_shape(a.constant && b.constant,
                          divide ? a.value / b.value : a.value * b.value);
      }
      return periodic_shape();
    }
    case Op::Sin:
    case Op::Cos: {
      const Shape a = analyze(*n.lhs);
      if (a.kind == K::Free) {
        const double v = n.op == Op::Sin ? std::sin(a.value) : std::cos(a.value);
        return free_shape(a.constant, v);
      }
      if (a.kind == K::Phase) {
        for (double c : a.coef) {
          const double k = c / kTwoPi;
          if (std::abs(k - std::round(k)) > 1e-9) {
            throw PeriodicityError("frequency of a fast phase must be 2*pi*k with integer k");
          }
        }
      }
      return periodic_shape();
    }
    case Op::Exp: {
      const Shape a = analyze(*n.lhs);
      if (a.kind == K::Phase) bare_xi("exp of a phase");
      if (a.kind == K::Free) return free_shape(a.constant, std::exp(a.value));
      return periodic_shape();
    }
  }
  return free_shape(true);
}

// ---------------------------------------------------------------------------
// Recursive-descent parser.

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_node(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Op::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = make_node(Op::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      return make_node(Op::Neg, factor());
    }
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    if (text == ".") {
      pos_ = start;
      fail("malformed number");
    }
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) {
      pos_ = start;
      fail("malformed number");
    }
    return make_leaf(Op::Number, v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "pi") return make_leaf(Op::Pi);
    if (name == "sin" || name == "cos" || name == "exp") {
      const Op op = name == "sin" ? Op::Sin : name == "cos" ? Op::Cos : Op::Exp;
      expect('(');
      NodePtr arg = expr();
      expect(')');
      return make_node(op, arg);
    }
    auto variable = [&](std::string_view prefix, Op op) -> NodePtr {
      if (name.size() == prefix.size() + 1 && name.substr(0, prefix.size()) == prefix) {
        const char d = name.back();
        if (d >= '1' && d <= '9') return make_leaf(op, 0.0, d - '0');
      }
      return nullptr;
    };
    if (auto v = variable("xi", Op::Xi)) return v;
    if (auto v = variable("x", Op::X)) return v;
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr::Expr() : root_(make_leaf(Op::Number, 0.0)) {}

Expr::Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

Expr Expr::constant(double value) { return Expr(make_leaf(Op::Number, value)); }

double Expr::evaluate(std::span<const double> x, std::span<const double> xi) const {
  return eval(*root_, x, xi);
}

std::string Expr::serialize() const { return to_text(*root_); }

int Expr::max_x_index() const { return max_index(*root_, Op::X); }

int Expr::max_xi_index() const { return max_index(*root_, Op::Xi); }

bool Expr::is_zero_literal() const { return root_->op == Op::Number && root_->value == 0.0; }

Expr parse_expr(std::string_view source) {
  Parser parser(source);
  NodePtr root = parser.parse();
  const Shape shape = analyze(*root);
  if (shape.kind == Shape::Phase) bare_xi("expression is not periodic");
  return Expr(std::move(root));
}

}  // namespace homog
