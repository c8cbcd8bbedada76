#include "finsler/expression.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace finsler {

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, int n, const std::map<std::string, double>& params,
                   Expression& out)
      : text_(text), n_(n), params_(params), out_(out) {}

  int parse() {
    const int root = expr();
    skip_space();
    if (pos_ != text_.size()) error("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    throw ParseError("expression '" + text_ + "': " + what + " at offset " +
                         std::to_string(pos_),
                     pos_);
  }

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

  int add(Expression::Node node, std::size_t begin) {
    out_.nodes_.push_back(node);
    out_.spans_.emplace_back(begin, pos_);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int binary(Expression::Op op, int lhs, int rhs) {
    return add({op, 0.0, 0, lhs, rhs}, out_.spans_[lhs].first);
  }

  int expr() {
    int lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = binary(Expression::Op::kAdd, lhs, term());
      else if (accept('-'))
        lhs = binary(Expression::Op::kSub, lhs, term());
      else
        return lhs;
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = binary(Expression::Op::kMul, lhs, unary());
      else if (accept('/'))
        lhs = binary(Expression::Op::kDiv, lhs, unary());
      else
        return lhs;
    }
  }

  int unary() {
    skip_space();
    const std::size_t begin = pos_;
    if (accept('-')) {
      const int operand = unary();
      return add({Expression::Op::kNeg, 0.0, 0, operand, -1}, begin);
    }
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = atom();
    if (accept('^')) return binary(Expression::Op::kPow, base, unary());
    return base;
  }

  int atom() {
    skip_space();
    const std::size_t begin = pos_;
    if (pos_ >= text_.size()) error("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      if (!accept(')')) error("expected ')'");
      out_.spans_[inner] = {begin, pos_};
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* first = text_.data() + pos_;
      char* last = nullptr;
      const double v = std::strtod(first, &last);
      if (last == first) error("malformed number");
      pos_ += static_cast<std::size_t>(last - first);
      return add({Expression::Op::kNumber, v, 0, -1, -1}, begin);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string name = text_.substr(begin, pos_ - begin);
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') return call(name, begin);
      return name_ref(name, begin);
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  int call(const std::string& name, std::size_t begin) {
    static const std::map<std::string, Expression::Op> functions = {
        {"sqrt", Expression::Op::kSqrt}, {"exp", Expression::Op::kExp},
        {"log", Expression::Op::kLog},   {"sin", Expression::Op::kSin},
        {"cos", Expression::Op::kCos}};
    auto it = functions.find(name);
    if (it == functions.end()) {
      pos_ = begin;
      error("unknown function '" + name + "'");
    }
    accept('(');
    const int arg = expr();
    if (!accept(')')) error("expected ')' after argument of " + name);
    return add({it->second, 0.0, 0, arg, -1}, begin);
  }

  int name_ref(const std::string& name, std::size_t begin) {
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'y')) {
      int index = 0;
      const auto* first = name.data() + 1;
      const auto* last = name.data() + name.size();
      auto [ptr, ec] = std::from_chars(first, last, index);
      if (ec == std::errc() && ptr == last) {
        if (index < 1 || index > n_) {
          pos_ = begin;
          error("variable '" + name + "' out of range for dimension " + std::to_string(n_));
        }
        const int var = (name[0] == 'x' ? 0 : n_) + index - 1;
        return add({Expression::Op::kVariable, 0.0, var, -1, -1}, begin);
      }
    }
    auto it = params_.find(name);
    if (it == params_.end()) {
      pos_ = begin;
      error("unknown name '" + name + "'");
    }
    return add({Expression::Op::kNumber, it->second, 0, -1, -1}, begin);
  }

  const std::string& text_;
  int n_;
  const std::map<std::string, double>& params_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(const std::string& text, int n,
                             const std::map<std::string, double>& params) {
  if (n < 1) throw std::invalid_argument("Expression::parse: dimension must be positive");
  Expression e;
  e.n_ = n;
  e.text_ = text;
  ExpressionParser parser(e.text_, n, params, e);
  e.root_ = parser.parse();
  return e;
}

Expression Expression::constant(double value, int n) {
  Expression e;
  e.n_ = n;
  e.text_ = std::to_string(value);
  e.nodes_.push_back({Op::kNumber, value, 0, -1, -1});
  e.spans_.emplace_back(0, e.text_.size());
  e.root_ = 0;
  return e;
}

std::string Expression::describe(int node) const {
  const auto [begin, end] = spans_.at(node);
  std::string s = text_.substr(begin, end - begin);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

bool Expression::depends_on_y() const {
  for (const auto& node : nodes_)
    if (node.op == Op::kVariable && node.variable >= n_) return true;
  return false;
}

bool Expression::is_constant() const {
  for (const auto& node : nodes_)
    if (node.op == Op::kVariable) return false;
  return true;
}

}  // namespace finsler
