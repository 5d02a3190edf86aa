#include "cone_verify/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

#include "cone_verify/errors.hpp"

namespace cone_verify {

struct Expression::Node {
  Kind kind = Kind::Number;
  double number = 0.0;
  std::size_t variable = 0;
  Function function = Function::Sin;
  std::vector<std::shared_ptr<const Node>> children;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Kind;
using Function = Expression::Function;

// ---------------------------------------------------------------------------
// Arithmetic on double and Dual through one set of overloads.

Dual make(double v, double d) { return Dual{v, d}; }

Dual operator+(const Dual& a, const Dual& b) { return make(a.value + b.value, a.derivative + b.derivative); }
Dual operator-(const Dual& a, const Dual& b) { return make(a.value - b.value, a.derivative - b.derivative); }
Dual operator-(const Dual& a) { return make(-a.value, -a.derivative); }
Dual operator*(const Dual& a, const Dual& b) {
  return make(a.value * b.value, a.derivative * b.value + a.value * b.derivative);
}
Dual operator/(const Dual& a, const Dual& b) {
  return make(a.value / b.value,
              (a.derivative * b.value - a.value * b.derivative) / (b.value * b.value));
}

double divide(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}
Dual divide(const Dual& a, const Dual& b) {
  if (b.value == 0.0) throw DomainError("division by zero");
  return a / b;
}

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x); }

double power(double a, double b) {
  if (a < 0.0 && !is_integer(b)) throw DomainError("negative base with non-integer exponent");
  if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
  return std::pow(a, b);
}

Dual power(const Dual& a, const Dual& b) {
  const double p = power(a.value, b.value);
  double d = 0.0;
  if (a.derivative != 0.0) {
    if (b.value == 0.0) {
      d = 0.0;
    } else {
      d += b.value * power(a.value, b.value - 1.0) * a.derivative;
    }
  }
  if (b.derivative != 0.0) {
    if (a.value <= 0.0) throw DomainError("variable exponent needs a positive base");
    d += p * std::log(a.value) * b.derivative;
  }
  return make(p, d);
}

double apply(Function f, double a) {
  switch (f) {
    case Function::Sin: return std::sin(a);
    case Function::Cos: return std::cos(a);
    case Function::Exp: return std::exp(a);
    case Function::Log:
      if (a <= 0.0) throw DomainError("log of a non-positive number");
      return std::log(a);
    case Function::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of a negative number");
      return std::sqrt(a);
    case Function::Tanh: return std::tanh(a);
  }
  return 0.0;
}

Dual apply(Function f, const Dual& a) {
  const double v = apply(f, a.value);
  double slope = 0.0;
  switch (f) {
    case Function::Sin: slope = std::cos(a.value); break;
    case Function::Cos: slope = -std::sin(a.value); break;
    case Function::Exp: slope = v; break;
    case Function::Log: slope = 1.0 / a.value; break;
    case Function::Sqrt:
      if (v == 0.0 && a.derivative != 0.0)
        throw DomainError("sqrt is not differentiable at 0");
      slope = v == 0.0 ? 0.0 : 0.5 / v;
      break;
    case Function::Tanh: slope = 1.0 - v * v; break;
  }
  return make(v, slope * a.derivative);
}

template <typename T>
T constant_of(double x) {
  if constexpr (std::is_same_v<T, double>) {
    return x;
  } else {
    return Dual{x, 0.0};
  }
}

template <typename T>
T eval_node(const Expression::Node& node, std::span<const T> x) {
  switch (node.kind) {
    case Kind::Number: return constant_of<T>(node.number);
    case Kind::Variable: return x[node.variable];
    case Kind::Negate: return -eval_node<T>(*node.children[0], x);
    case Kind::Add: return eval_node<T>(*node.children[0], x) + eval_node<T>(*node.children[1], x);
    case Kind::Subtract: return eval_node<T>(*node.children[0], x) - eval_node<T>(*node.children[1], x);
    case Kind::Multiply: return eval_node<T>(*node.children[0], x) * eval_node<T>(*node.children[1], x);
    case Kind::Divide: return divide(eval_node<T>(*node.children[0], x), eval_node<T>(*node.children[1], x));
    case Kind::Power: return power(eval_node<T>(*node.children[0], x), eval_node<T>(*node.children[1], x));
    case Kind::Call: return apply(node.function, eval_node<T>(*node.children[0], x));
  }
  return constant_of<T>(0.0);
}

const char* function_name(Function f) {
  switch (f) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sqrt: return "sqrt";
    case Function::Tanh: return "tanh";
  }
  return "?";
}

std::optional<Function> function_from_name(std::string_view name) {
  if (name == "sin") return Function::Sin;
  if (name == "cos") return Function::Cos;
  if (name == "exp") return Function::Exp;
  if (name == "log") return Function::Log;
  if (name == "sqrt") return Function::Sqrt;
  if (name == "tanh") return Function::Tanh;
  return std::nullopt;
}

NodePtr number_node(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = Kind::Number;
  n->number = v;
  return n;
}

// Folds nodes whose children are all numbers. Domain errors are left for
// evaluation time so they surface with the evaluation point.
NodePtr fold(std::shared_ptr<Expression::Node> node) {
  if (node->kind == Kind::Number || node->kind == Kind::Variable) return node;
  for (const auto& c : node->children)
    if (c->kind != Kind::Number) return node;
  try {
    const double v = eval_node<double>(*node, std::span<const double>{});
    if (!std::isfinite(v)) return node;
    return number_node(v);
  } catch (const DomainError&) {
    return node;
  }
}

NodePtr unary_node(Kind kind, NodePtr child) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = kind;
  n->children = {std::move(child)};
  return fold(n);
}

NodePtr binary_node(Kind kind, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = kind;
  n->children = {std::move(lhs), std::move(rhs)};
  return fold(n);
}

NodePtr call_node(Function f, NodePtr arg) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = Kind::Call;
  n->function = f;
  n->children = {std::move(arg)};
  return fold(n);
}

// ---------------------------------------------------------------------------

class Parser {
 public:
  Parser(std::string_view text, std::size_t variables, const ParameterMap& params)
      : text_(text), variables_(variables), params_(params) {}

  NodePtr parse() {
    NodePtr e = expression();
    skip_space();
    if (pos_ != text_.size()) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
    if (text_[pos_] != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    while (true) {
      if (accept('+')) {
        lhs = binary_node(Kind::Add, lhs, term());
      } else if (accept('-')) {
        lhs = binary_node(Kind::Subtract, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (true) {
      if (accept('*')) {
        lhs = binary_node(Kind::Multiply, lhs, unary());
      } else if (accept('/')) {
        lhs = binary_node(Kind::Divide, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return unary_node(Kind::Negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary_node(Kind::Power, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expression();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc()) throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return number_node(value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));

    if (auto f = function_from_name(name)) {
      skip_space();
      if (pos_ >= text_.size() || text_[pos_] != '(')
        throw ParseError("function '" + name + "' needs an argument list", pos_);
      ++pos_;
      NodePtr arg = expression();
      expect(')');
      return call_node(*f, std::move(arg));
    }
    if (auto it = params_.find(name); it != params_.end()) return number_node(it->second);
    if (name.size() > 1 && name[0] == 'x') {
      std::size_t index = 0;
      const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc() && ptr == name.data() + name.size() && index >= 1 &&
          index <= variables_ && name[1] != '0') {
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::Variable;
        n->variable = index - 1;
        return n;
      }
    }
    throw UnknownIdentifier(name, start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t variables_;
  const ParameterMap& params_;
};

void print(const Expression::Node& node, std::string& out) {
  switch (node.kind) {
    case Kind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", node.number);
      if (node.number < 0.0 || std::signbit(node.number)) {
        out += "(-";
        std::snprintf(buf, sizeof buf, "%.17g", -node.number);
        out += buf;
        out += ")";
      } else {
        out += buf;
      }
      return;
    }
    case Kind::Variable:
      out += "x" + std::to_string(node.variable + 1);
      return;
    case Kind::Negate:
      out += "(-";
      print(*node.children[0], out);
      out += ")";
      return;
    case Kind::Call:
      out += function_name(node.function);
      out += "(";
      print(*node.children[0], out);
      out += ")";
      return;
    default:
      break;
  }
  const char* op = "?";
  switch (node.kind) {
    case Kind::Add: op = " + "; break;
    case Kind::Subtract: op = " - "; break;
    case Kind::Multiply: op = " * "; break;
    case Kind::Divide: op = " / "; break;
    case Kind::Power: op = " ^ "; break;
    default: break;
  }
  out += "(";
  print(*node.children[0], out);
  out += op;
  print(*node.children[1], out);
  out += ")";
}

bool same(const Expression::Node& a, const Expression::Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Number: return a.number == b.number && std::signbit(a.number) == std::signbit(b.number);
    case Kind::Variable: return a.variable == b.variable;
    case Kind::Call:
      if (a.function != b.function) return false;
      break;
    default: break;
  }
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!same(*a.children[i], *b.children[i])) return false;
  return true;
}

}  // namespace

Expression Expression::parse(std::string_view text, std::size_t variable_count,
                             const ParameterMap& parameters) {
  for (const auto& [name, value] : parameters) {
    if (function_from_name(name))
      throw ConfigError("parameter name '" + name + "' shadows a function");
    (void)value;
  }
  Parser parser(text, variable_count, parameters);
  return Expression(parser.parse(), variable_count);
}

std::string Expression::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

double Expression::evaluate(std::span<const double> x) const {
  if (x.size() != variable_count_) throw DimensionMismatch("expression point dimension");
  return eval_node<double>(*root_, x);
}

Dual Expression::evaluate(std::span<const Dual> x) const {
  if (x.size() != variable_count_) throw DimensionMismatch("expression point dimension");
  return eval_node<Dual>(*root_, x);
}

Expression::Kind Expression::kind() const { return root_->kind; }
double Expression::number() const { return root_->number; }

bool Expression::operator==(const Expression& other) const {
  return variable_count_ == other.variable_count_ && same(*root_, *other.root_);
}

}  // namespace cone_verify
