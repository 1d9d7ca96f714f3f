#include "intertwine/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

#include "intertwine/errors.hpp"

namespace intertwine {

struct Expr::Node {
  Kind kind;
  std::vector<Expr> children;
  Complex value;
  int exponent = 0;
  std::size_t hash = 0;
  std::size_t size = 1;
  bool closed = true;
};

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_value(Complex c) {
  // +0.0 and -0.0 compare equal, so they must hash equal.
  const double re = c.real() == 0.0 ? 0.0 : c.real();
  const double im = c.imag() == 0.0 ? 0.0 : c.imag();
  return mix(std::hash<double>{}(re), std::hash<double>{}(im));
}

const Expr& zero_expr() {
  static const Expr z{Complex{0.0, 0.0}};
  return z;
}

}  // namespace

Expr make_node(Expr::Kind kind, std::vector<Expr> children, Complex value, int exponent) {
  auto node = std::make_shared<Expr::Node>();
  node->kind = kind;
  node->value = value;
  node->exponent = exponent;
  std::size_t h = mix(static_cast<std::size_t>(kind) + 1, static_cast<std::size_t>(exponent));
  if (kind == Expr::Kind::Constant) h = mix(h, hash_value(value));
  if (kind == Expr::Kind::Variable) node->closed = false;
  for (const auto& c : children) {
    h = mix(h, c.hash());
    node->size += c.size();
    node->closed = node->closed && c.is_closed();
  }
  node->hash = h;
  node->children = std::move(children);
  return Expr(std::shared_ptr<const Expr::Node>(std::move(node)));
}

Expr::Expr() : Expr(Complex{0.0, 0.0}) {}

Expr::Expr(Complex value) : node_(make_node(Kind::Constant, {}, value, 0).node_) {}

Expr::Expr(double value) : Expr(Complex{value, 0.0}) {}

Expr Expr::variable() {
  static const Expr x = make_node(Kind::Variable, {}, {}, 0);
  return x;
}

Expr::Kind Expr::kind() const { return node_->kind; }
Complex Expr::value() const { return node_->value; }
int Expr::exponent() const { return node_->exponent; }
const std::vector<Expr>& Expr::children() const { return node_->children; }
bool Expr::is_zero() const { return is_constant() && value() == Complex{0.0, 0.0}; }
bool Expr::is_closed() const { return node_->closed; }
std::size_t Expr::hash() const { return node_->hash; }
std::size_t Expr::size() const { return node_->size; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind() || a.exponent() != b.exponent()) return false;
  if (a.kind() == Expr::Kind::Constant) return a.value() == b.value();
  const auto& ca = a.children();
  const auto& cb = b.children();
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (!(ca[i] == cb[i])) return false;
  }
  return true;
}

namespace {

using Kind = Expr::Kind;

// Splits a term into constant coefficient and non-constant core.
std::pair<Complex, Expr> split_coefficient(const Expr& t) {
  if (t.kind() == Kind::Neg) {
    auto [c, core] = split_coefficient(t.children()[0]);
    return {-c, core};
  }
  if (t.kind() == Kind::Mul && t.children().front().is_constant()) {
    const auto& ch = t.children();
    std::vector<Expr> rest(ch.begin() + 1, ch.end());
    Expr core = rest.size() == 1 ? rest[0] : make_node(Kind::Mul, std::move(rest), {}, 0);
    return {ch.front().value(), core};
  }
  return {Complex{1.0, 0.0}, t};
}

// Splits a factor into base and integer exponent.
std::pair<Expr, int> split_power(const Expr& f) {
  if (f.kind() == Kind::Pow) return {f.children()[0], f.exponent()};
  return {f, 1};
}

Expr scale(Complex c, const Expr& core) {
  if (c == Complex{0.0, 0.0}) return zero_expr();
  if (c == Complex{1.0, 0.0}) return core;
  if (core.is_constant()) return Expr(c * core.value());
  if (c == Complex{-1.0, 0.0}) return make_node(Kind::Neg, {core}, {}, 0);
  std::vector<Expr> factors{Expr(c)};
  if (core.kind() == Kind::Mul) {
    for (const auto& f : core.children()) factors.push_back(f);
  } else {
    factors.push_back(core);
  }
  return make_node(Kind::Mul, std::move(factors), {}, 0);
}

Expr make_add(const std::vector<Expr>& terms) {
  Complex constant{0.0, 0.0};
  std::vector<std::pair<Complex, Expr>> grouped;
  std::function<void(const Expr&)> absorb = [&](const Expr& t) {
    if (t.kind() == Kind::Add) {
      for (const auto& c : t.children()) absorb(c);
      return;
    }
    if (t.is_constant()) {
      constant += t.value();
      return;
    }
    auto [coef, core] = split_coefficient(t);
    for (auto& g : grouped) {
      if (g.second == core) {
        g.first += coef;
        return;
      }
    }
    grouped.emplace_back(coef, core);
  };
  for (const auto& t : terms) absorb(t);

  std::vector<Expr> out;
  for (const auto& [coef, core] : grouped) {
    Expr t = scale(coef, core);
    if (!t.is_zero()) out.push_back(t);
  }
  if (constant != Complex{0.0, 0.0}) out.emplace_back(constant);
  if (out.empty()) return zero_expr();
  if (out.size() == 1) return out[0];
  return make_node(Kind::Add, std::move(out), {}, 0);
}

Expr make_pow(const Expr& base, int exponent);

Expr make_mul(const std::vector<Expr>& factors) {
  Complex coef{1.0, 0.0};
  std::vector<std::pair<Expr, int>> powers;
  std::function<void(const Expr&)> absorb = [&](const Expr& f) {
    switch (f.kind()) {
      case Kind::Mul:
        for (const auto& c : f.children()) absorb(c);
        return;
      case Kind::Neg:
        coef = -coef;
        absorb(f.children()[0]);
        return;
      case Kind::Constant:
        coef *= f.value();
        return;
      default:
        break;
    }
    auto [base, e] = split_power(f);
    for (auto& p : powers) {
      if (p.first == base) {
        p.second += e;
        return;
      }
    }
    powers.emplace_back(base, e);
  };
  for (const auto& f : factors) absorb(f);

  if (coef == Complex{0.0, 0.0}) return zero_expr();
  std::vector<Expr> out;
  out.reserve(powers.size());
  for (const auto& [base, e] : powers) out.push_back(make_pow(base, e));
  std::stable_sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) {
    if (a.kind() != b.kind()) return a.kind() < b.kind();
    return a.hash() < b.hash();
  });
  if (out.empty()) return Expr(coef);
  Expr core = out.size() == 1 ? out[0] : make_node(Kind::Mul, std::move(out), {}, 0);
  return scale(coef, core);
}

Expr make_pow(const Expr& base, int exponent) {
  if (exponent < 1) throw std::invalid_argument("power exponent must be a positive integer");
  if (exponent == 1) return base;
  if (base.is_constant()) return Expr(std::pow(base.value(), exponent));
  if (base.kind() == Kind::Pow) return make_pow(base.children()[0], base.exponent() * exponent);
  return make_node(Kind::Pow, {base}, {}, exponent);
}

template <typename F>
Expr unary(Kind kind, const Expr& arg, F fold) {
  if (arg.is_constant()) return Expr(fold(arg.value()));
  return make_node(kind, {arg}, {}, 0);
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) { return make_add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return make_add({a, -b}); }
Expr operator*(const Expr& a, const Expr& b) { return make_mul({a, b}); }

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_zero()) return zero_expr();
  if (b.is_constant() && !b.is_zero()) return a * Expr(Complex{1.0, 0.0} / b.value());
  if (a == b) return Expr(1.0);
  return make_node(Kind::Div, {a, b}, {}, 0);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.kind() == Kind::Neg) return a.children()[0];
  auto [coef, core] = split_coefficient(a);
  if (coef != Complex{1.0, 0.0}) return scale(-coef, core);
  return make_node(Kind::Neg, {a}, {}, 0);
}

Expr pow(const Expr& base, int exponent) { return make_pow(base, exponent); }
Expr exp(const Expr& arg) {
  return unary(Kind::Exp, arg, [](Complex z) { return std::exp(z); });
}
Expr sin(const Expr& arg) {
  return unary(Kind::Sin, arg, [](Complex z) { return std::sin(z); });
}
Expr cos(const Expr& arg) {
  return unary(Kind::Cos, arg, [](Complex z) { return std::cos(z); });
}
Expr sinh(const Expr& arg) {
  return unary(Kind::Sinh, arg, [](Complex z) { return std::sinh(z); });
}
Expr cosh(const Expr& arg) {
  return unary(Kind::Cosh, arg, [](Complex z) { return std::cosh(z); });
}

Expr differentiate(const Expr& e) {
  const auto& ch = e.children();
  switch (e.kind()) {
    case Kind::Constant:
      return zero_expr();
    case Kind::Variable:
      return Expr(1.0);
    case Kind::Add: {
      std::vector<Expr> terms;
      terms.reserve(ch.size());
      for (const auto& c : ch) terms.push_back(differentiate(c));
      return make_add(terms);
    }
    case Kind::Mul: {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < ch.size(); ++i) {
        Expr d = differentiate(ch[i]);
        if (d.is_zero()) continue;
        std::vector<Expr> factors;
        for (std::size_t j = 0; j < ch.size(); ++j) factors.push_back(j == i ? d : ch[j]);
        terms.push_back(make_mul(factors));
      }
      return make_add(terms);
    }
    case Kind::Div: {
      const Expr& a = ch[0];
      const Expr& b = ch[1];
      return differentiate(a) / b - a * differentiate(b) / pow(b, 2);
    }
    case Kind::Neg:
      return -differentiate(ch[0]);
    case Kind::Pow: {
      const int n = e.exponent();
      return make_mul({Expr(static_cast<double>(n)), pow(ch[0], n - 1), differentiate(ch[0])});
    }
    case Kind::Exp:
      return e * differentiate(ch[0]);
    case Kind::Sin:
      return cos(ch[0]) * differentiate(ch[0]);
    case Kind::Cos:
      return -(sin(ch[0]) * differentiate(ch[0]));
    case Kind::Sinh:
      return cosh(ch[0]) * differentiate(ch[0]);
    case Kind::Cosh:
      return sinh(ch[0]) * differentiate(ch[0]);
  }
  throw std::logic_error("unknown expression kind");
}

Expr differentiate(const Expr& e, int times) {
  Expr out = e;
  for (int k = 0; k < times; ++k) out = differentiate(out);
  return out;
}

Complex evaluate(const Expr& e, double x) {
  const auto& ch = e.children();
  switch (e.kind()) {
    case Kind::Constant:
      return e.value();
    case Kind::Variable:
      return {x, 0.0};
    case Kind::Add: {
      Complex s{0.0, 0.0};
      for (const auto& c : ch) s += evaluate(c, x);
      return s;
    }
    case Kind::Mul: {
      Complex p{1.0, 0.0};
      for (const auto& c : ch) p *= evaluate(c, x);
      return p;
    }
    case Kind::Div: {
      const Complex den = evaluate(ch[1], x);
      if (std::abs(den) < std::numeric_limits<double>::min()) throw DivisionByZero(x);
      return evaluate(ch[0], x) / den;
    }
    case Kind::Neg:
      return -evaluate(ch[0], x);
    case Kind::Pow: {
      const Complex b = evaluate(ch[0], x);
      Complex p{1.0, 0.0};
      for (int k = 0; k < e.exponent(); ++k) p *= b;
      return p;
    }
    case Kind::Exp:
      return std::exp(evaluate(ch[0], x));
    case Kind::Sin:
      return std::sin(evaluate(ch[0], x));
    case Kind::Cos:
      return std::cos(evaluate(ch[0], x));
    case Kind::Sinh:
      return std::sinh(evaluate(ch[0], x));
    case Kind::Cosh:
      return std::cosh(evaluate(ch[0], x));
  }
  throw std::logic_error("unknown expression kind");
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_constant(Complex c) {
  if (c.imag() == 0.0) {
    if (c.real() < 0.0 || std::signbit(c.real())) return "(" + format_double(c.real()) + ")";
    return format_double(c.real());
  }
  std::string im = format_double(std::abs(c.imag()));
  std::string sign = std::signbit(c.imag()) ? "-" : "+";
  return "(" + format_double(c.real()) + sign + im + "i)";
}

bool atomic(const Expr& e) {
  switch (e.kind()) {
    case Kind::Constant:
    case Kind::Variable:
    case Kind::Exp:
    case Kind::Sin:
    case Kind::Cos:
    case Kind::Sinh:
    case Kind::Cosh:
      return true;
    default:
      return false;
  }
}

std::string wrap(const Expr& e) {
  return atomic(e) ? to_string(e) : "(" + to_string(e) + ")";
}

const char* function_name(Kind k) {
  switch (k) {
    case Kind::Exp: return "exp";
    case Kind::Sin: return "sin";
    case Kind::Cos: return "cos";
    case Kind::Sinh: return "sinh";
    case Kind::Cosh: return "cosh";
    default: return "";
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  const auto& ch = e.children();
  switch (e.kind()) {
    case Kind::Constant:
      return format_constant(e.value());
    case Kind::Variable:
      return "x";
    case Kind::Add: {
      std::string s;
      for (std::size_t i = 0; i < ch.size(); ++i) {
        if (i) s += " + ";
        s += ch[i].kind() == Kind::Neg ? "(" + to_string(ch[i]) + ")" : to_string(ch[i]);
      }
      return s;
    }
    case Kind::Mul: {
      std::string s;
      for (std::size_t i = 0; i < ch.size(); ++i) {
        if (i) s += "*";
        s += wrap(ch[i]);
      }
      return s;
    }
    case Kind::Div:
      return wrap(ch[0]) + "/" + wrap(ch[1]);
    case Kind::Neg:
      return "-" + wrap(ch[0]);
    case Kind::Pow:
      return wrap(ch[0]) + "^" + std::to_string(e.exponent());
    default:
      return std::string(function_name(e.kind())) + "(" + to_string(ch[0]) + ")";
  }
}

}  // namespace intertwine
