#include "liouville/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

namespace liouville {

struct Expression::Node {
  enum class Kind { constant, x1, x2, r2, unary_minus, add, sub, mul, div, pow, call } kind;
  double value = 0.0;
  std::function<double(double)> fn;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x1, double x2) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::x1: return x1;
      case Kind::x2: return x2;
      case Kind::r2: return x1 * x1 + x2 * x2;
      case Kind::unary_minus: return -lhs->eval(x1, x2);
      case Kind::add: return lhs->eval(x1, x2) + rhs->eval(x1, x2);
      case Kind::sub: return lhs->eval(x1, x2) - rhs->eval(x1, x2);
      case Kind::mul: return lhs->eval(x1, x2) * rhs->eval(x1, x2);
      case Kind::div: return lhs->eval(x1, x2) / rhs->eval(x1, x2);
      case Kind::pow: return std::pow(lhs->eval(x1, x2), rhs->eval(x1, x2));
      case Kind::call: return fn(lhs->eval(x1, x2));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

class Parser {
public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ArgumentError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
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

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (accept('+')) n = make(Kind::add, n, product());
      else if (accept('-')) n = make(Kind::sub, n, product());
      else return n;
    }
  }
  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make(Kind::mul, n, unary());
      else if (accept('/')) n = make(Kind::div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Kind::unary_minus, unary());
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Kind::pow, base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (accept('(')) {
      NodePtr n = sum();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::constant;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x1") return make(Kind::x1);
      if (name == "x2") return make(Kind::x2);
      if (name == "r2") return make(Kind::r2);
      if (name == "pi") {
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::constant;
        n->value = liouville::pi;
        return n;
      }
      static const std::map<std::string, double (*)(double)> functions{
          {"exp", [](double v) { return std::exp(v); }},   {"log", [](double v) { return std::log(v); }},
          {"sqrt", [](double v) { return std::sqrt(v); }}, {"sin", [](double v) { return std::sin(v); }},
          {"cos", [](double v) { return std::cos(v); }},   {"tan", [](double v) { return std::tan(v); }},
          {"tanh", [](double v) { return std::tanh(v); }}, {"cosh", [](double v) { return std::cosh(v); }},
          {"sinh", [](double v) { return std::sinh(v); }}, {"abs", [](double v) { return std::abs(v); }}};
      const auto it = functions.find(name);
      if (it == functions.end()) fail("unknown identifier '" + name + "'");
      if (!accept('(')) fail("expected '(' after " + name);
      NodePtr arg = sum();
      if (!accept(')')) fail("missing ')'");
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::call;
      n->fn = it->second;
      n->lhs = arg;
      return n;
    }
    fail("unexpected character");
  }
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text).parse()) {}

double Expression::operator()(Complex x) const { return root_->eval(x.real(), x.imag()); }

}  // namespace liouville
