#include "nucc/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "nucc/errors.hpp"

namespace nucc::expr {

namespace {

struct Num final : Node {
  explicit Num(double v) : v_(v) {}
  double eval(double) const override { return v_; }
  double v_;
};

struct Time final : Node {
  double eval(double t) const override { return t; }
};

enum class BinOp { Add, Sub, Mul, Div };

struct Bin final : Node {
  Bin(BinOp op, NodePtr l, NodePtr r) : op_(op), l_(std::move(l)), r_(std::move(r)) {}
  double eval(double t) const override {
    const double a = l_->eval(t), b = r_->eval(t);
    switch (op_) {
      case BinOp::Add: return a + b;
      case BinOp::Sub: return a - b;
      case BinOp::Mul: return a * b;
      case BinOp::Div: return a / b;
    }
    return 0;
  }
  BinOp op_;
  NodePtr l_, r_;
};

struct Neg final : Node {
  explicit Neg(NodePtr c) : c_(std::move(c)) {}
  double eval(double t) const override { return -c_->eval(t); }
  NodePtr c_;
};

struct Pow final : Node {
  Pow(NodePtr b, long e) : b_(std::move(b)), e_(e) {}
  double eval(double t) const override {
    // integer exponent by repeated squaring; exact for small polynomial powers
    double base = b_->eval(t), acc = 1.0;
    long e = e_;
    while (e > 0) {
      if (e & 1) acc *= base;
      base *= base;
      e >>= 1;
    }
    return acc;
  }
  NodePtr b_;
  long e_;
};

enum class Fn { Sin, Cos, Exp };

struct Call final : Node {
  Call(Fn f, NodePtr a) : f_(f), a_(std::move(a)) {}
  double eval(double t) const override {
    const double x = a_->eval(t);
    switch (f_) {
      case Fn::Sin: return std::sin(x);
      case Fn::Cos: return std::cos(x);
      case Fn::Exp: return std::exp(x);
    }
    return 0;
  }
  Fn f_;
  NodePtr a_;
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SchemaError("expression error at position " + std::to_string(pos_) +
                      " in \"" + s_ + "\": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr l = term();
    for (;;) {
      if (accept('+'))
        l = std::make_shared<Bin>(BinOp::Add, l, term());
      else if (accept('-'))
        l = std::make_shared<Bin>(BinOp::Sub, l, term());
      else
        return l;
    }
  }

  NodePtr term() {
    NodePtr l = unary();
    for (;;) {
      if (accept('*'))
        l = std::make_shared<Bin>(BinOp::Mul, l, unary());
      else if (accept('/'))
        l = std::make_shared<Bin>(BinOp::Div, l, unary());
      else
        return l;
    }
  }

  NodePtr unary() {
    if (accept('-')) return std::make_shared<Neg>(unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) {
      skip_ws();
      const size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == start) fail("'^' needs a nonnegative integer exponent");
      const long e = std::strtol(s_.c_str() + start, nullptr, 10);
      return std::make_shared<Pow>(base, e);
    }
    return base;
  }

  NodePtr primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return ident();
    fail("expected a number, 't', a function call, or '('");
  }

  NodePtr number() {
    skip_ws();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("bad number");
    pos_ += static_cast<size_t>(end - begin);
    return std::make_shared<Num>(v);
  }

  NodePtr ident() {
    skip_ws();
    const size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (name == "t") return std::make_shared<Time>();
    Fn f;
    if (name == "sin")
      f = Fn::Sin;
    else if (name == "cos")
      f = Fn::Cos;
    else if (name == "exp")
      f = Fn::Exp;
    else
      fail("unknown identifier '" + name + "'");
    if (!accept('(')) fail("'" + name + "' needs '('");
    NodePtr a = expr();
    if (!accept(')')) fail("missing ')'");
    return std::make_shared<Call>(f, a);
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace

ScalarFn ScalarFn::parse(const std::string& text) {
  ScalarFn fn;
  fn.root_ = Parser(text).run();
  fn.source_ = text;
  return fn;
}

}  // namespace nucc::expr
