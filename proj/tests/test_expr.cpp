#include "doctest.h"

#include "sepcert/expr.hpp"

#include <cmath>
#include <random>
#include <string>

using namespace sepcert;
using namespace sepcert::expr;

namespace {

Point at_x(std::initializer_list<double> xs) { return {0.0, make_vec(xs), Vec()}; }

// Random smooth expression over t, x1..x3, u1..u2 with arguments kept away
// from the singularities of log, sqrt and division.
std::string random_smooth(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> coef(0.2, 2.0);
  const char* leaves[] = {"t", "x1", "x2", "x3", "u1", "u2"};
  if (depth == 0) {
    const int k = pick(rng);
    if (k < 6) return leaves[k];
    return std::to_string(coef(rng)).substr(0, 4);
  }
  const std::string a = random_smooth(rng, depth - 1);
  const std::string b = random_smooth(rng, depth - 1);
  switch (pick(rng)) {
    case 0: return "(" + a + " + " + b + ")";
    case 1: return "(" + a + " - " + b + ")";
    case 2: return a + " * " + b;
    case 3: return "(" + a + ") / (2 + sin(" + b + "))";
    case 4: return "sin(" + a + ")";
    case 5: return "cos(" + a + ") * " + b;
    case 6: return "exp(0.3 * " + a + ")";
    case 7: return "log(1.5 + cos(" + a + "))";
    case 8: return "sqrt(1 + (" + a + ")^2)";
    default: return "(" + a + ")^2 - " + b;
  }
}

}  // namespace

TEST_CASE("parse examples") {
  const Dims d{2, 1};
  const Ast a = parse("x1*x2 + sin(u1)", d);
  CHECK(a->op == Op::add);
  CHECK(a->lhs->op == Op::mul);
  CHECK(a->rhs->op == Op::sin);
  CHECK(print(a) == "((x1 * x2) + sin(u1))");

  CHECK(eval(parse("2^3^2", d), at_x({0, 0})) == 512.0);
  CHECK(eval(parse("-2^2", d), at_x({0, 0})) == -4.0);
  CHECK(eval(parse("2^-1", d), at_x({0, 0})) == 0.5);
  CHECK(eval(parse("10 - 4 - 3", d), at_x({0, 0})) == 3.0);
  CHECK(eval(parse("12 / 3 / 2", d), at_x({0, 0})) == 2.0);
  CHECK(eval(parse("  1+2 *3 ", d), at_x({0, 0})) == 7.0);
  CHECK(eval(parse("1.5e1 + .5", d), at_x({0, 0})) == 15.5);
}

TEST_CASE("parse errors carry columns") {
  const Dims d{2, 1};
  auto message = [&](const char* text) {
    try {
      parse(text, d);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("x7") == "unknown identifier 'x7' at col 1");
  CHECK(message("x1 + y") == "unknown identifier 'y' at col 6");
  CHECK(message("u2") == "unknown identifier 'u2' at col 1");
  CHECK(message("x0") == "unknown identifier 'x0' at col 1");
  CHECK(message("(x1 + 1") == "unbalanced '(' opened at col 1");
  CHECK(message("x1 + 1)") == "unbalanced ')' at col 7");
  CHECK(message("sin(x1, x2)") == "function 'sin' expects 1 argument at col 1");
  CHECK(message("2 * cos") == "function 'cos' expects 1 argument at col 5");
  CHECK(message("x1(2)") == "'x1' is not a function at col 1");
  CHECK(message("x1 +") == "unexpected end of expression at col 5");
  CHECK(message("") == "empty expression at col 1");
  CHECK(message("x1 $ 2") == "unexpected '$' at col 4");
}

TEST_CASE("eval_dual examples") {
  const Dims d{2, 0};
  const Dual a = eval_dual(parse("x1^2 + x2^2", d), at_x({1, 2}), at_x({1, 0}));
  CHECK(a.value == 5.0);
  CHECK(a.deriv == 2.0);

  const Dual c = eval_dual(parse("3.5", d), at_x({1, 2}), at_x({1, 1}));
  CHECK(c.deriv == 0.0);

  const Dual e = eval_dual(parse("exp(x1)", {1, 0}), at_x({0}), at_x({1}));
  CHECK(e.value == 1.0);
  CHECK(e.deriv == 1.0);

  CHECK(gradient_x(parse("x1 * x2 + t", d), {3.0, make_vec({2, 5}), Vec()}) == make_vec({5, 2}));
  const Dual dt = eval_dual(parse("t * u1", {0, 1}), {2.0, Vec(), make_vec({3})}, {1.0, Vec(), make_vec({0})});
  CHECK(dt.deriv == 3.0);
}

TEST_CASE("domain errors") {
  const Dims d{1, 0};
  CHECK_THROWS_AS(eval(parse("log(x1)", d), at_x({0})), EvalError);
  CHECK_THROWS_AS(eval(parse("1 / x1", d), at_x({0})), EvalError);
  CHECK_THROWS_AS(eval(parse("sqrt(x1)", d), at_x({-1})), EvalError);
  CHECK_THROWS_AS(eval(parse("x1^0.5", d), at_x({-1})), EvalError);
  CHECK(eval(parse("x1^3", d), at_x({-2})) == -8.0);
  try {
    eval(parse("2 + log(x1)", d), at_x({-1}));
  } catch (const EvalError& e) {
    CHECK(e.col() == 5);
  }
}

TEST_CASE("print then parse reaches a fixed point") {
  std::mt19937 rng(11);
  const Dims d{3, 2};
  for (int i = 0; i < 200; ++i) {
    const std::string src = random_smooth(rng, 1 + i % 4);
    const std::string once = print(parse(src, d));
    CHECK(print(parse(once, d)) == once);
  }
  CHECK(print(parse("0.1 + 1e-300", d)) == "(0.1 + 1e-300)");
}

TEST_CASE("dual numbers agree with central differences") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const Dims d{3, 2};
  const double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Ast a = parse(random_smooth(rng, 3), d);
    const Point at{coord(rng), make_vec({coord(rng), coord(rng), coord(rng)}), make_vec({coord(rng), coord(rng)})};
    Point dir{coord(rng), make_vec({coord(rng), coord(rng), coord(rng)}), make_vec({coord(rng), coord(rng)})};
    auto shifted = [&](double s) {
      return Point{at.t + s * dir.t, at.x + s * dir.x, at.u + s * dir.u};
    };
    const double fd = (eval(a, shifted(h)) - eval(a, shifted(-h))) / (2 * h);
    const double ad = eval_dual(a, at, dir).deriv;
    worst = std::max(worst, std::abs(ad - fd) / std::max(1.0, std::abs(ad)));
  }
  CHECK(worst <= 1e-6);
}
