#pragma once

// Shared metric and candidate builders for the test suites.

#include <string>
#include <vector>

#include <finsler/classify.hpp>

namespace fx {

using finsler::CandidateField;
using finsler::Expression;
using finsler::MetricModel;

inline std::vector<Expression> exprs(const std::vector<std::string>& s, int n) {
  std::vector<Expression> out;
  for (const auto& t : s) out.push_back(Expression::parse(t, n));
  return out;
}

inline std::string r2(int n) {
  std::string s = "(";
  for (int i = 1; i <= n; ++i) s += (i > 1 ? "+x" : "x") + std::to_string(i) + "^2";
  return s + ")";
}

inline std::vector<Expression> diagonal(const std::string& d, int n) {
  std::vector<std::string> a;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a.push_back(i == j ? d : "0");
  return exprs(a, n);
}

inline MetricModel euclidean(int n = 3) {
  auto m = MetricModel::euclidean(n);
  m.set_name("euclidean" + std::to_string(n));
  return m;
}

/// Stereographic chart of the unit sphere, sectional curvature +1.
inline MetricModel sphere(int n = 3) {
  auto m = MetricModel::riemannian(n, diagonal("4/(1+" + r2(n) + ")^2", n));
  m.set_name("sphere" + std::to_string(n));
  return m;
}

/// Poincare ball, sectional curvature -1.
inline MetricModel hyperbolic(int n = 3) {
  auto m = MetricModel::riemannian(n, diagonal("4/(1-" + r2(n) + ")^2", n));
  m.set_name("hyperbolic" + std::to_string(n));
  return m;
}

/// dx1^2 + cosh(x1)^2 (dx2^2 + dx3^2): not of constant curvature, with the
/// concircular field cosh(x1) d/dx1 and psi = sinh(x1).
inline MetricModel warped() {
  const std::string c2 = "((exp(x1)+exp(-x1))/2)^2";
  auto m = MetricModel::riemannian(3, exprs({"1", "0", "0", "0", c2, "0", "0", "0", c2}, 3));
  m.set_name("warped");
  m.set_x_box({{0.3, 0.9}, {-0.5, 0.5}, {-0.5, 0.5}});
  return m;
}

inline MetricModel randers_const(int n = 3) {
  std::vector<std::string> b(n, "0");
  b[0] = "0.3";
  auto m = MetricModel::randers(n, diagonal("1", n), exprs(b, n));
  m.set_name("randers_const");
  return m;
}

inline MetricModel randers_x() {
  auto m = MetricModel::randers(
      3, exprs({"1+0.1*x2^2", "0", "0", "0", "1", "0", "0", "0", "1+0.1*x1*x3"}, 3),
      exprs({"0.2+0.1*x2", "0.1*sin(x1)", "0.05*x1*x3"}, 3));
  m.set_name("randers_x");
  return m;
}

/// A Randers-type metric written directly as an expression for L.
inline MetricModel expression_metric() {
  auto m = MetricModel::from_expression(
      3, Expression::parse("sqrt((1+0.1*x1^2)*y1^2 + y2^2 + y3^2) + 0.2*y2 + 0.1*x3*y1", 3));
  m.set_name("expression");
  return m;
}

inline CandidateField candidate(const std::string& name, const std::vector<std::string>& c,
                                const std::string& psi = {}) {
  CandidateField f;
  f.name = name;
  f.components = exprs(c, static_cast<int>(c.size()));
  if (!psi.empty()) f.psi = Expression::parse(psi, static_cast<int>(c.size()));
  f.declared_y_independent = true;
  return f;
}

inline CandidateField minus_x(int n = 3) {
  std::vector<std::string> c;
  for (int i = 1; i <= n; ++i) c.push_back("-x" + std::to_string(i));
  return candidate("minus_x", c);
}

inline CandidateField plus_x(int n = 3) {
  std::vector<std::string> c;
  for (int i = 1; i <= n; ++i) c.push_back("x" + std::to_string(i));
  return candidate("plus_x", c);
}

inline CandidateField sphere_gradient(int n = 3) {
  auto f = minus_x(n);
  f.name = "sphere_gradient";
  f.psi = Expression::parse("-(1-" + r2(n) + ")/(1+" + r2(n) + ")", n);
  return f;
}

inline CandidateField warped_gradient() {
  return candidate("warped_gradient", {"(exp(x1)+exp(-x1))/2", "0", "0"}, "(exp(x1)-exp(-x1))/2");
}

}  // namespace fx
