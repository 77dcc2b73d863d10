#pragma once

#include <memory>
#include <string>

#include "liouville/common.hpp"

namespace liouville {

// Small arithmetic expression in the variables x1, x2 (and r2 = x1^2 + x2^2).
// Grammar: + - * / ^, unary minus, parentheses, numbers, pi,
// exp log sqrt sin cos tan tanh cosh sinh abs.
class Expression {
public:
  explicit Expression(const std::string& text);
  double operator()(Complex x) const;
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace liouville
