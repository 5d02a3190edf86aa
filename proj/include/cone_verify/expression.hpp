#pragma once

// Arithmetic expressions over x1..xn with forward-mode differentiation.
//
// Grammar (usual precedence, ^ is right-associative and binds tighter than
// unary minus):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | x<k> | param | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt | tanh

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cone_verify {

/// value + eps * derivative, eps^2 = 0.
struct Dual {
  double value = 0.0;
  double derivative = 0.0;
};

using ParameterMap = std::map<std::string, double>;

class Expression {
 public:
  enum class Kind { Number, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Call };
  enum class Function { Sin, Cos, Exp, Log, Sqrt, Tanh };

  /// Parameters are substituted and constant subtrees folded at parse time.
  static Expression parse(std::string_view text, std::size_t variable_count,
                          const ParameterMap& parameters = {});

  /// Fully parenthesized text; parsing it again gives an identical tree.
  std::string to_string() const;

  double evaluate(std::span<const double> x) const;
  Dual evaluate(std::span<const Dual> x) const;

  std::size_t variable_count() const { return variable_count_; }
  Kind kind() const;
  /// Only meaningful when kind() == Kind::Number.
  double number() const;

  bool operator==(const Expression& other) const;

  struct Node;

 private:
  Expression(std::shared_ptr<const Node> root, std::size_t variable_count)
      : root_(std::move(root)), variable_count_(variable_count) {}

  std::shared_ptr<const Node> root_;
  std::size_t variable_count_ = 0;
};

}  // namespace cone_verify
