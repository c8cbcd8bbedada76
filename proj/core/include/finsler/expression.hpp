#pragma once

// Minimal arithmetic expression language for metric parameters and candidate
// fields:
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('-' | '+') unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' expr ')' | '(' expr ')'
//
// Names x1..xn and y1..yn denote the base point and the direction. Other
// names are looked up in a parameter table at parse time. Functions: sqrt,
// exp, log, sin, cos.

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "finsler/error.hpp"
#include "finsler/multidual.hpp"

namespace finsler {

class Expression {
 public:
  enum class Op { kNumber, kVariable, kNeg, kAdd, kSub, kMul, kDiv, kPow, kSqrt, kExp, kLog, kSin, kCos };

  struct Node {
    Op op;
    double number = 0.0;  // kNumber
    int variable = 0;     // kVariable: 0..n-1 -> x, n..2n-1 -> y
    int lhs = -1;
    int rhs = -1;
  };

  /// Parses `text` for dimension n. Throws ParseError with a character offset.
  static Expression parse(const std::string& text, int n,
                          const std::map<std::string, double>& params = {});
  static Expression constant(double value, int n);

  int dimension() const noexcept { return n_; }
  const std::string& text() const noexcept { return text_; }

  /// Source text of the subexpression rooted at `node`.
  std::string describe(int node) const;

  bool depends_on_y() const;
  bool is_constant() const;

  /// Evaluates with vars = (x1..xn, y1..yn). Out-of-domain operations throw
  /// DomainError naming the offending subexpression.
  template <typename T>
  T evaluate(std::span<const T> vars) const;

  template <typename T>
  T evaluate(std::span<const T> x, std::span<const T> y) const {
    std::vector<T> vars(x.begin(), x.end());
    vars.insert(vars.end(), y.begin(), y.end());
    return evaluate<T>(std::span<const T>(vars));
  }

 private:
  template <typename T>
  T eval_node(int index, std::span<const T> vars) const;

  int n_ = 0;
  std::string text_;
  std::vector<Node> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> spans_;  // source range per node
  int root_ = -1;

  friend class ExpressionParser;
};

namespace detail {

inline double apply_sqrt(double v) { return std::sqrt(v); }
inline double apply_exp(double v) { return std::exp(v); }
inline double apply_log(double v) { return std::log(v); }
inline double apply_sin(double v) { return std::sin(v); }
inline double apply_cos(double v) { return std::cos(v); }
inline double apply_pow(double v, double p) { return std::pow(v, p); }
inline MultiDual apply_sqrt(const MultiDual& v) { return sqrt(v); }
inline MultiDual apply_exp(const MultiDual& v) { return exp(v); }
inline MultiDual apply_log(const MultiDual& v) { return log(v); }
inline MultiDual apply_sin(const MultiDual& v) { return sin(v); }
inline MultiDual apply_cos(const MultiDual& v) { return cos(v); }
inline MultiDual apply_pow(const MultiDual& v, double p) { return pow(v, p); }

template <typename T>
T apply_pow(const T& base, const T& exponent) {
  const double p = value_of(exponent);
  if constexpr (std::is_same_v<T, MultiDual>) {
    if (!exponent.is_constant()) return exp(exponent * log(base));
  }
  return apply_pow(base, p);
}

}  // namespace detail

template <typename T>
T Expression::evaluate(std::span<const T> vars) const {
  if (static_cast<int>(vars.size()) != 2 * n_)
    throw std::invalid_argument("Expression::evaluate: expected 2n variables");
  return eval_node<T>(root_, vars);
}

template <typename T>
T Expression::eval_node(int index, std::span<const T> vars) const {
  const Node& node = nodes_[index];
  auto fail = [&](const char* why) -> T {
    throw DomainError(std::string(why) + " in '" + describe(index) + "'");
  };
  switch (node.op) {
    case Op::kNumber:
      return T(node.number);
    case Op::kVariable:
      return vars[node.variable];
    case Op::kNeg:
      return -eval_node<T>(node.lhs, vars);
    case Op::kAdd:
      return eval_node<T>(node.lhs, vars) + eval_node<T>(node.rhs, vars);
    case Op::kSub:
      return eval_node<T>(node.lhs, vars) - eval_node<T>(node.rhs, vars);
    case Op::kMul:
      return eval_node<T>(node.lhs, vars) * eval_node<T>(node.rhs, vars);
    case Op::kDiv: {
      T a = eval_node<T>(node.lhs, vars);
      T b = eval_node<T>(node.rhs, vars);
      if (value_of(b) == 0.0) return fail("division by zero");
      return a / b;
    }
    case Op::kPow: {
      T a = eval_node<T>(node.lhs, vars);
      T b = eval_node<T>(node.rhs, vars);
      const double p = value_of(b);
      const bool integral = p == std::floor(p) && std::abs(p) <= 64;
      if constexpr (std::is_same_v<T, MultiDual>) {
        if (!b.is_constant() && !(value_of(a) > 0.0))
          return fail("variable power of non-positive base");
      }
      if (!integral && !(value_of(a) > 0.0)) return fail("non-integer power of non-positive base");
      if (integral && p < 0 && value_of(a) == 0.0) return fail("negative power of zero");
      return detail::apply_pow(a, b);
    }
    case Op::kSqrt: {
      T a = eval_node<T>(node.lhs, vars);
      const double v = value_of(a);
      if (v < 0.0) return fail("sqrt of negative value");
      if constexpr (std::is_same_v<T, MultiDual>) {
        if (v == 0.0 && !a.is_constant()) return fail("sqrt at zero is not differentiable");
      }
      return detail::apply_sqrt(a);
    }
    case Op::kExp: {
      T r = detail::apply_exp(eval_node<T>(node.lhs, vars));
      if (!std::isfinite(value_of(r))) return fail("exp overflow");
      return r;
    }
    case Op::kLog: {
      T a = eval_node<T>(node.lhs, vars);
      if (!(value_of(a) > 0.0)) return fail("log of non-positive value");
      return detail::apply_log(a);
    }
    case Op::kSin:
      return detail::apply_sin(eval_node<T>(node.lhs, vars));
    case Op::kCos:
      return detail::apply_cos(eval_node<T>(node.lhs, vars));
  }
  return fail("unknown operation");
}

}  // namespace finsler
