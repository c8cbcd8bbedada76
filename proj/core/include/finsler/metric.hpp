#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "finsler/diffcore.hpp"
#include "finsler/expression.hpp"
#include "finsler/multidual.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

struct EuclideanFamily {};

/// L^2 = a_ij(x) y^i y^j
struct RiemannianFamily {
  std::vector<Expression> a;  // n*n, row-major
};

/// L = sqrt(a_ij(x) y^i y^j) + b_i(x) y^i
struct RandersFamily {
  std::vector<Expression> a;  // n*n, row-major
  std::vector<Expression> b;  // n
};

/// L given directly as an expression in (x, y).
struct ExpressionFamily {
  Expression finsler_function;
};

using MetricFamily = std::variant<EuclideanFamily, RiemannianFamily, RandersFamily, ExpressionFamily>;

/// Axis-aligned box of base points used for sampling.
using Box = std::vector<std::pair<double, double>>;

/// An evaluatable Finsler function L(x, y) on an n-dimensional chart.
/// Immutable after construction.
class MetricModel {
 public:
  static MetricModel euclidean(int n);
  static MetricModel riemannian(int n, std::vector<Expression> a);
  static MetricModel randers(int n, std::vector<Expression> a, std::vector<Expression> b);
  static MetricModel from_expression(int n, Expression finsler_function);

  int dimension() const noexcept { return n_; }
  const MetricFamily& family() const noexcept { return family_; }
  std::string family_name() const;

  const std::string& name() const noexcept { return name_; }
  MetricModel& set_name(std::string name) {
    name_ = std::move(name);
    return *this;
  }
  const Box& x_box() const noexcept { return box_; }
  MetricModel& set_x_box(Box box);

  /// L^2 at (x, y); T is double or MultiDual.
  template <typename T>
  T energy(std::span<const T> x, std::span<const T> y) const;

  double finsler_function(const JetPoint& p) const;

  ScalarField energy_field() const;

  /// Throws AdmissibilityError when L <= 0, g is not positive definite, or a
  /// family-specific condition (symmetric a, ||b||_a < 1) fails at p.
  void check_admissible(const JetPoint& p) const;

  /// True when the metric is Riemannian by construction (T = 0 identically).
  bool is_riemannian_family() const {
    return std::holds_alternative<EuclideanFamily>(family_) ||
           std::holds_alternative<RiemannianFamily>(family_);
  }

 private:
  MetricModel(int n, MetricFamily family);

  int n_;
  MetricFamily family_;
  std::string name_;
  Box box_;
};

template <typename T>
T MetricModel::energy(std::span<const T> x, std::span<const T> y) const {
  std::vector<T> vars(x.begin(), x.end());
  vars.insert(vars.end(), y.begin(), y.end());
  const std::span<const T> v(vars);
  auto quadratic = [&](const std::vector<Expression>& a) {
    T sum(0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) sum += a[i * n_ + j].evaluate<T>(v) * y[i] * y[j];
    return sum;
  };
  return std::visit(
      [&](const auto& f) -> T {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, EuclideanFamily>) {
          T sum(0.0);
          for (int i = 0; i < n_; ++i) sum += y[i] * y[i];
          return sum;
        } else if constexpr (std::is_same_v<F, RiemannianFamily>) {
          return quadratic(f.a);
        } else if constexpr (std::is_same_v<F, RandersFamily>) {
          const T aa = quadratic(f.a);
          if (!(value_of(aa) > 0.0)) throw DomainError("randers: a(y, y) is not positive");
          T beta(0.0);
          for (int i = 0; i < n_; ++i) beta += f.b[i].template evaluate<T>(v) * y[i];
          using std::sqrt;
          const T l = sqrt(aa) + beta;
          return l * l;
        } else {
          const T l = f.finsler_function.template evaluate<T>(v);
          return l * l;
        }
      },
      family_);
}

/// Jets of the zeroth-layer tensors at one point. `order` is the truncation
/// order of L^2; g carries order-2, T order-3.
struct MetricJets {
  int n = 0;
  int order = 0;
  JetPoint at;
  std::vector<MultiDual> vars;  // x1..xn, y1..yn
  MultiDual energy;             // L^2
  MultiDual finsler;            // L
  JetTensor g;                  // g_ij
  JetTensor g_inv;              // g^ij
  JetTensor cartan;             // T_ijk

  MetricJets(const MetricModel& m, const JetPoint& p, int order);

  const MultiDual& x(int i) const { return vars[i]; }
  const MultiDual& y(int i) const { return vars[n + i]; }
  /// d/dx^i and d/dy^i of a jet.
  MultiDual dx(const MultiDual& f, int i) const { return f.derivative(i); }
  MultiDual dy(const MultiDual& f, int i) const { return f.derivative(n + i); }
};

// Zeroth-layer tensors at a point.
PointTensor fundamental_tensor(const MetricModel& m, const JetPoint& p);
PointTensor normalized_supporting_form(const MetricModel& m, const JetPoint& p);  // l_i
PointTensor angular_metric(const MetricModel& m, const JetPoint& p);
PointTensor cartan_tensor(const MetricModel& m, const JetPoint& p);

struct ContractedTorsion {
  PointTensor c;     // C_i = g^jk T_ijk
  PointTensor cbar;  // C^i = g^ij C_j
  double c2 = 0.0;   // C(Cbar)
};
ContractedTorsion contracted_torsion(const MetricModel& m, const JetPoint& p);

struct SamplingSpec {
  int count = 50;
  std::uint64_t seed = 1;
  int max_retries = 200;
};

/// Random admissible points: x uniform in the model's box, y uniform on the
/// Euclidean unit sphere then rescaled so that L(x, y) = 1. Throws
/// AdmissibilityError when a point cannot be found within max_retries.
std::vector<JetPoint> sample_corpus(const MetricModel& m, const SamplingSpec& spec);

/// Names and one-line descriptions of the shipped metric families.
std::vector<std::pair<std::string, std::string>> metric_families();

}  // namespace finsler
