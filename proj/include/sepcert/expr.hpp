#pragma once

#include "sepcert/linalg.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sepcert::expr {

/// Declared variable counts: x1..xn and u1..um (t is always available).
struct Dims {
  int n = 0;
  int m = 0;
};

enum class Op { constant, time, state, control, neg, sin, cos, exp, log, sqrt, abs, add, sub, mul, div, pow };

struct Node {
  Op op = Op::constant;
  double value = 0.0;
  /// Zero-based variable index for state/control nodes.
  int index = 0;
  /// One-based column of the token that produced the node.
  int col = 0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

using Ast = std::shared_ptr<const Node>;

/// Parse failure at a one-based column.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, int col)
      : std::invalid_argument(what + " at col " + std::to_string(col)), col_(col) {}
  int col() const { return col_; }

 private:
  int col_;
};

/// Domain failure while evaluating (log of a nonpositive value, ...).
class EvalError : public std::domain_error {
 public:
  EvalError(const std::string& what, int col)
      : std::domain_error(what + " at col " + std::to_string(col)), col_(col) {}
  int col() const { return col_; }

 private:
  int col_;
};

Ast parse(std::string_view text, Dims dims);

/// Fully parenthesized text that parses back to the same tree.
std::string print(const Ast& ast);

struct Point {
  double t = 0.0;
  Vec x;
  Vec u;
};

struct Dual {
  double value = 0.0;
  double deriv = 0.0;
};

double eval(const Ast& ast, const Point& at);

/// Value and directional derivative along `dir` in (t, x, u).
Dual eval_dual(const Ast& ast, const Point& at, const Point& dir);

/// d/dx by one forward pass per state coordinate.
Vec gradient_x(const Ast& ast, const Point& at);

/// A compiled scalar expression of x alone, with its gradient.
ScalarFn scalar_fn(const Ast& ast);

}  // namespace sepcert::expr
