#include "mfg/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mfg {

struct Expression::Node {
  enum class Op { number, x, y, neg, add, sub, mul, div, pow, call1, call2 } op;
  double value = 0.0;
  double (*fn1)(double) = nullptr;
  double (*fn2)(double, double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(double x, double y) const {
    switch (op) {
      case Op::number: return value;
      case Op::x: return x;
      case Op::y: return y;
      case Op::neg: return -a->eval(x, y);
      case Op::add: return a->eval(x, y) + b->eval(x, y);
      case Op::sub: return a->eval(x, y) - b->eval(x, y);
      case Op::mul: return a->eval(x, y) * b->eval(x, y);
      case Op::div: return a->eval(x, y) / b->eval(x, y);
      case Op::pow: return std::pow(a->eval(x, y), b->eval(x, y));
      case Op::call1: return fn1(a->eval(x, y));
      case Op::call2: return fn2(a->eval(x, y), b->eval(x, y));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double fsin(double v) { return std::sin(v); }
double fcos(double v) { return std::cos(v); }
double fexp(double v) { return std::exp(v); }
double fabs_(double v) { return std::abs(v); }
double fsqrt(double v) { return std::sqrt(v); }
double fmax_(double a, double b) { return std::max(a, b); }
double fmin_(double a, double b) { return std::min(a, b); }

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("expression '" + std::string(s_) + "', column " +
                                std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+')) lhs = make(Op::add, lhs, product());
      else if (accept('-')) lhs = make(Op::sub, lhs, product());
      else return lhs;
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::mul, lhs, unary());
      else if (accept('/')) lhs = make(Op::div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Op::pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr e = sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::string rest(s_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("bad number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::number;
    n->value = v;
    return n;
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string id(s_.substr(start, pos_ - start));
    if (id == "x") return make(Op::x);
    if (id == "y") return make(Op::y);
    if (id == "pi") {
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::number;
      n->value = std::numbers::pi;
      return n;
    }
    double (*f1)(double) = nullptr;
    double (*f2)(double, double) = nullptr;
    if (id == "sin") f1 = fsin;
    else if (id == "cos") f1 = fcos;
    else if (id == "exp") f1 = fexp;
    else if (id == "abs") f1 = fabs_;
    else if (id == "sqrt") f1 = fsqrt;
    else if (id == "max") f2 = fmax_;
    else if (id == "min") f2 = fmin_;
    else {
      pos_ = start;
      fail("unknown name '" + id + "'");
    }
    expect('(');
    auto n = std::make_shared<Expression::Node>();
    n->a = sum();
    if (f2) {
      expect(',');
      n->b = sum();
      n->op = Op::call2;
      n->fn2 = f2;
    } else {
      n->op = Op::call1;
      n->fn1 = f1;
    }
    expect(')');
    return n;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  return Expression(std::string(text), Parser(text).parse());
}

double Expression::operator()(double x, double y) const { return root_->eval(x, y); }

}  // namespace mfg
