#include <doctest.h>

#include <functional>

#include <cmath>
#include <random>

#include "cone_verify/errors.hpp"
#include "cone_verify/expression.hpp"

using namespace cone_verify;

namespace {

double eval(const std::string& text, std::vector<double> x = {}, const ParameterMap& p = {}) {
  return Expression::parse(text, x.size(), p).evaluate(x);
}

std::size_t parse_error_position(const std::string& text, std::size_t n = 2) {
  try {
    Expression::parse(text, n);
  } catch (const ParseError& e) {
    return e.position();
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("precedence and associativity") {
  CHECK(eval("1+2*3") == 7.0);
  CHECK(eval("(1+2)*3") == 9.0);
  CHECK(eval("2^3^2") == 512.0);
  CHECK(eval("-2^2") == -4.0);
  CHECK(eval("2^-1") == 0.5);
  CHECK(eval("8/4/2") == 1.0);
  CHECK(eval("1-2-3") == -4.0);
  CHECK(eval("--3") == 3.0);
  CHECK(eval("1e-3*2") == doctest::Approx(2e-3));
  CHECK(eval("x1*x2 + x3", {2, 3, 4}) == 10.0);
}

TEST_CASE("functions and parameters") {
  CHECK(eval("exp(0)+cos(0)+sin(0)") == 2.0);
  CHECK(eval("log(exp(2))") == doctest::Approx(2.0));
  CHECK(eval("sqrt(16)") == 4.0);
  CHECK(eval("tanh(0)") == 0.0);
  CHECK(eval("a*x1+b", {2}, {{"a", 3}, {"b", 1}}) == 7.0);
  CHECK_THROWS_AS(Expression::parse("sin(x1)", 1, {{"sin", 1.0}}), ConfigError);
}

TEST_CASE("syntax errors carry positions") {
  CHECK(parse_error_position("x2+") == 3);
  CHECK(parse_error_position("x1*)") == 3);
  CHECK(parse_error_position("(x1") == 3);
  CHECK(parse_error_position("x1 x2") == 3);
  CHECK_THROWS_AS(Expression::parse("y+1", 2), UnknownIdentifier);
  CHECK_THROWS_AS(Expression::parse("x3", 2), UnknownIdentifier);
  CHECK_THROWS_AS(Expression::parse("foo(x1)", 2), UnknownIdentifier);
}

TEST_CASE("domain errors at evaluation time") {
  CHECK_THROWS_AS(eval("1/x1", {0.0}), DomainError);
  CHECK_THROWS_AS(eval("log(x1)", {-1.0}), DomainError);
  CHECK_THROWS_AS(eval("sqrt(x1)", {-1.0}), DomainError);
  CHECK_THROWS_AS(eval("x1^0.5", {-1.0}), DomainError);
  CHECK(eval("x1^2", {-3.0}) == 9.0);
}

TEST_CASE("constant folding") {
  const auto e = Expression::parse("2*a+1", 1, {{"a", 3}});
  CHECK(e.kind() == Expression::Kind::Number);
  CHECK(e.number() == 7.0);
  // Folding that would raise keeps the subtree for evaluation-time errors.
  const auto bad = Expression::parse("1/0 + x1", 1);
  CHECK_THROWS_AS(bad.evaluate(std::vector<double>{1.0}), DomainError);
}

TEST_CASE("dual-number derivatives") {
  const auto e = Expression::parse("exp(x1)*sin(x2) + x1^3/x2", 2);
  const double a = 0.3, b = 1.1;
  const std::vector<Dual> dx{{a, 1.0}, {b, 0.0}};
  const std::vector<Dual> dy{{a, 0.0}, {b, 1.0}};
  CHECK(e.evaluate(dx).derivative ==
        doctest::Approx(std::exp(a) * std::sin(b) + 3 * a * a / b).epsilon(1e-14));
  CHECK(e.evaluate(dy).derivative ==
        doctest::Approx(std::exp(a) * std::cos(b) - a * a * a / (b * b)).epsilon(1e-14));
  const auto p = Expression::parse("x1^x2", 2);
  CHECK(p.evaluate(std::vector<Dual>{{2.0, 0.0}, {3.0, 1.0}}).derivative ==
        doctest::Approx(8.0 * std::log(2.0)));
  CHECK(Expression::parse("exp(x1)", 1).evaluate(std::vector<Dual>{{0.0, 1.0}}).derivative == 1.0);
}

TEST_CASE("property: print then parse is the identity on a corpus") {
  const std::vector<std::string> corpus = {
      "sigma*(x2-x1)", "x1*(rho-x3)-x2", "x1*x2-beta*x3", "-x1^2", "(-x1)^2",
      "2^3^x1",        "x1/x2/x3",       "x1-(x2-x3)",   "sin(cos(x1))+tanh(x2)*exp(-x3)",
      "-(-(x1))",      "1e-300*x1",      "log(sqrt(x1*x1+1))", "x1^-2", "0.1+0.2*x2"};
  const ParameterMap params{{"sigma", 10}, {"rho", 28}, {"beta", 8.0 / 3.0}};
  for (const auto& text : corpus) {
    const auto e = Expression::parse(text, 3, params);
    const auto again = Expression::parse(e.to_string(), 3);
    CHECK_MESSAGE(e == again, text << " -> " << e.to_string());
    CHECK(again.to_string() == e.to_string());
  }
}

TEST_CASE("property: random expression trees round-trip and evaluate identically") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> num(-3.0, 3.0);
  std::function<std::string(int)> gen = [&](int depth) -> std::string {
    const int k = depth == 0 ? pick(rng) % 2 : pick(rng);
    switch (k) {
      case 0: return "x" + std::to_string(1 + pick(rng) % 3);
      case 1: return std::to_string(num(rng));
      case 2: return "(" + gen(depth - 1) + "+" + gen(depth - 1) + ")";
      case 3: return "(" + gen(depth - 1) + "-" + gen(depth - 1) + ")";
      case 4: return gen(depth - 1) + "*" + gen(depth - 1);
      case 5: return "-" + gen(depth - 1);
      case 6: return "sin(" + gen(depth - 1) + ")";
      case 7: return "tanh(" + gen(depth - 1) + ")";
      case 8: return "(" + gen(depth - 1) + ")^2";
      default: return "cos(" + gen(depth - 1) + ")";
    }
  };
  const std::vector<double> x{0.3, -0.7, 1.2};
  for (int trial = 0; trial < 200; ++trial) {
    const std::string text = gen(4);
    const auto e = Expression::parse(text, 3);
    const auto again = Expression::parse(e.to_string(), 3);
    CHECK_MESSAGE(e == again, text);
    CHECK(e.evaluate(x) == again.evaluate(x));
  }
}
