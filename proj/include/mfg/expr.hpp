#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace mfg {

/// Coefficient expression in x and y.
///
/// Grammar: numbers, x, y, pi, unary minus, + - * / ^ (right associative),
/// parentheses, and the calls sin cos exp abs sqrt (one argument) and
/// max min (two arguments). Parse errors throw std::invalid_argument with the
/// column of the offending token.
class Expression {
 public:
  static Expression parse(std::string_view text);

  double operator()(double x, double y = 0.0) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  Expression(std::string text, std::shared_ptr<const Node> root)
      : text_(std::move(text)), root_(std::move(root)) {}

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace mfg
