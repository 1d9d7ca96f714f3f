// Precedence-climbing parser for the scenario expression grammar:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' integer)?
//   primary := number ['i'] | 'x' | 'i' | func '(' expr ')' | '(' expr ')'
//   func    := exp | sin | cos | sinh | cosh

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>

#include "intertwine/errors.hpp"
#include "intertwine/expr.hpp"

namespace intertwine {
namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw SyntaxError(pos_, message); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        lhs = lhs + parse_term();
      } else if (peek('-')) {
        ++pos_;
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    while (true) {
      if (peek('*')) {
        ++pos_;
        if (peek('*')) fail("unexpected '*' ('^' is the power operator)");
        lhs = lhs * parse_unary();
      } else if (peek('/')) {
        ++pos_;
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (peek('-')) {
      ++pos_;
      return -parse_unary();
    }
    if (peek('+')) {
      ++pos_;
      return parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (peek('^')) {
      ++pos_;
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected positive integer exponent");
      int exponent = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, exponent);
      if (ec != std::errc{} || exponent < 1) {
        pos_ = start;
        fail("expected positive integer exponent");
      }
      return pow(base, exponent);
    }
    return base;
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    char* end = nullptr;
    const double value = std::strtod(literal.c_str(), &end);
    if (end != literal.c_str() + literal.size()) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < text_.size() && text_[pos_] == 'i' &&
        !(pos_ + 1 < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_ + 1])))) {
      ++pos_;
      return Expr(Complex{0.0, value});
    }
    return Expr(value);
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "x") return Expr::variable();
      if (name == "i") return Expr(Complex{0.0, 1.0});
      Expr (*fn)(const Expr&) = nullptr;
      if (name == "exp") fn = &exp;
      else if (name == "sin") fn = &sin;
      else if (name == "cos") fn = &cos;
      else if (name == "sinh") fn = &sinh;
      else if (name == "cosh") fn = &cosh;
      if (fn == nullptr) {
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
      }
      expect('(');
      Expr arg = parse_expr();
      expect(')');
      return fn(arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

}  // namespace intertwine
