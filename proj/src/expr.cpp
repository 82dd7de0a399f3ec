#include "sepcert/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cctype>

namespace sepcert::expr {

namespace {

struct Function {
  std::string_view name;
  Op op;
};

constexpr std::array<Function, 6> kFunctions{{{"sin", Op::sin},
                                             {"cos", Op::cos},
                                             {"exp", Op::exp},
                                             {"log", Op::log},
                                             {"sqrt", Op::sqrt},
                                             {"abs", Op::abs}}};

Ast make(Op op, int col, Ast lhs = nullptr, Ast rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->col = col;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, Dims dims) : s_(text), dims_(dims) {}

  Ast run() {
    skip();
    if (pos_ == s_.size()) throw ParseError("empty expression", 1);
    Ast e = sum();
    skip();
    if (pos_ != s_.size()) {
      if (s_[pos_] == ')') throw ParseError("unbalanced ')'", col());
      throw ParseError(std::string("unexpected '") + s_[pos_] + "'", col());
    }
    return e;
  }

 private:
  int col() const { return static_cast<int>(pos_) + 1; }

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

  Ast sum() {
    Ast lhs = product();
    for (;;) {
      skip();
      const int c = col();
      if (accept('+')) {
        lhs = make(Op::add, c, lhs, product());
      } else if (accept('-')) {
        lhs = make(Op::sub, c, lhs, product());
      } else {
        return lhs;
      }
    }
  }

  Ast product() {
    Ast lhs = unary();
    for (;;) {
      skip();
      const int c = col();
      if (accept('*')) {
        lhs = make(Op::mul, c, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Op::div, c, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Ast unary() {
    skip();
    const int c = col();
    if (accept('-')) return make(Op::neg, c, unary());
    if (accept('+')) return unary();
    return power();
  }

  Ast power() {
    Ast base = primary();
    skip();
    const int c = col();
    if (accept('^')) return make(Op::pow, c, base, unary());
    return base;
  }

  Ast primary() {
    skip();
    const int c = col();
    if (pos_ == s_.size()) throw ParseError("unexpected end of expression", c);
    const char ch = s_[pos_];
    if (ch == '(') {
      ++pos_;
      Ast e = sum();
      if (!accept(')')) throw ParseError("unbalanced '(' opened", c);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(ch))) return identifier();
    throw ParseError(std::string("unexpected '") + ch + "'", c);
  }

  Ast number() {
    const int c = col();
    double v = 0.0;
    const char* first = s_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
    if (ec != std::errc()) throw ParseError("malformed number", c);
    pos_ += static_cast<std::size_t>(ptr - first);
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = v;
    n->col = c;
    return n;
  }

  Ast identifier() {
    const int c = col();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string_view name = s_.substr(start, pos_ - start);
    for (const Function& f : kFunctions) {
      if (name != f.name) continue;
      if (!accept('(')) throw ParseError("function '" + std::string(name) + "' expects 1 argument", c);
      Ast arg = sum();
      skip();
      if (pos_ < s_.size() && s_[pos_] == ',') {
        throw ParseError("function '" + std::string(name) + "' expects 1 argument", c);
      }
      if (!accept(')')) throw ParseError("unbalanced '(' opened", c);
      return make(f.op, c, arg);
    }
    Ast var = variable(name, c);
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      throw ParseError("'" + std::string(name) + "' is not a function", c);
    }
    return var;
  }

  Ast variable(std::string_view name, int c) const {
    if (name == "t") return make(Op::time, c);
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'u') && name[1] != '0') {
      int idx = 0;
      const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      const int limit = name[0] == 'x' ? dims_.n : dims_.m;
      if (ec == std::errc() && ptr == name.data() + name.size() && idx >= 1 && idx <= limit) {
        auto n = std::make_shared<Node>();
        n->op = name[0] == 'x' ? Op::state : Op::control;
        n->index = idx - 1;
        n->col = c;
        return n;
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", c);
  }

  std::string_view s_;
  Dims dims_;
  std::size_t pos_ = 0;
};

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string_view op_name(Op op) {
  for (const Function& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  switch (op) {
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::pow: return "^";
    default: return "?";
  }
}

double coord(const Vec& v, int i) { return i < v.size() ? v(i) : 0.0; }

// Forward-mode evaluation; `dir` may be null for plain values.
Dual walk(const Node& n, const Point& at, const Point* dir) {
  switch (n.op) {
    case Op::constant: return {n.value, 0.0};
    case Op::time: return {at.t, dir ? dir->t : 0.0};
    case Op::state: return {at.x(n.index), dir ? coord(dir->x, n.index) : 0.0};
    case Op::control: return {at.u(n.index), dir ? coord(dir->u, n.index) : 0.0};
    default: break;
  }
  const Dual a = walk(*n.lhs, at, dir);
  switch (n.op) {
    case Op::neg: return {-a.value, -a.deriv};
    case Op::sin: return {std::sin(a.value), std::cos(a.value) * a.deriv};
    case Op::cos: return {std::cos(a.value), -std::sin(a.value) * a.deriv};
    case Op::exp: {
      const double e = std::exp(a.value);
      return {e, e * a.deriv};
    }
    case Op::log:
      if (a.value <= 0.0) throw EvalError("log of nonpositive value", n.col);
      return {std::log(a.value), a.deriv / a.value};
    case Op::sqrt: {
      if (a.value < 0.0) throw EvalError("sqrt of negative value", n.col);
      const double r = std::sqrt(a.value);
      return {r, a.deriv == 0.0 ? 0.0 : a.deriv / (2.0 * r)};
    }
    case Op::abs: {
      const double sign = (a.value > 0.0) - (a.value < 0.0);
      return {std::abs(a.value), sign * a.deriv};
    }
    default: break;
  }
  const Dual b = walk(*n.rhs, at, dir);
  switch (n.op) {
    case Op::add: return {a.value + b.value, a.deriv + b.deriv};
    case Op::sub: return {a.value - b.value, a.deriv - b.deriv};
    case Op::mul: return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
    case Op::div:
      if (b.value == 0.0) throw EvalError("division by zero", n.col);
      return {a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)};
    case Op::pow: {
      if (a.value < 0.0 && b.value != std::floor(b.value)) {
        throw EvalError("non-integer power of a negative value", n.col);
      }
      if (a.value == 0.0 && b.value < 0.0) throw EvalError("division by zero", n.col);
      const double v = std::pow(a.value, b.value);
      double d = 0.0;
      if (a.deriv != 0.0) d += b.value * std::pow(a.value, b.value - 1.0) * a.deriv;
      if (b.deriv != 0.0) {
        if (a.value <= 0.0) throw EvalError("variable exponent of a nonpositive value", n.col);
        d += v * std::log(a.value) * b.deriv;
      }
      return {v, d};
    }
    default: break;
  }
  throw EvalError("malformed expression", n.col);
}

}  // namespace

Ast parse(std::string_view text, Dims dims) { return Parser(text, dims).run(); }

std::string print(const Ast& ast) {
  const Node& n = *ast;
  switch (n.op) {
    case Op::constant: return format_double(n.value);
    case Op::time: return "t";
    case Op::state: return "x" + std::to_string(n.index + 1);
    case Op::control: return "u" + std::to_string(n.index + 1);
    case Op::neg: return "(-" + print(n.lhs) + ")";
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow:
      return "(" + print(n.lhs) + " " + std::string(op_name(n.op)) + " " + print(n.rhs) + ")";
    default: return std::string(op_name(n.op)) + "(" + print(n.lhs) + ")";
  }
}

double eval(const Ast& ast, const Point& at) { return walk(*ast, at, nullptr).value; }

Dual eval_dual(const Ast& ast, const Point& at, const Point& dir) { return walk(*ast, at, &dir); }

Vec gradient_x(const Ast& ast, const Point& at) {
  Vec g(at.x.size());
  Point dir{0.0, Vec::Zero(at.x.size()), Vec::Zero(at.u.size())};
  for (Eigen::Index i = 0; i < at.x.size(); ++i) {
    dir.x(i) = 1.0;
    g(i) = walk(*ast, at, &dir).deriv;
    dir.x(i) = 0.0;
  }
  return g;
}

ScalarFn scalar_fn(const Ast& ast) {
  return {[ast](const Vec& x) { return eval(ast, {0.0, x, Vec()}); },
          [ast](const Vec& x) { return gradient_x(ast, {0.0, x, Vec()}); }};
}

}  // namespace sepcert::expr
