#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A MultiDual holds the Taylor coefficients c_a = (d^a f)(p) / a! of a scalar
// function around a point p, for every multi-index a over `nvars` variables
// with |a| <= order. Arithmetic truncates to the smaller order of the two
// operands; differentiating with respect to one variable lowers the order by
// one. A MultiDual with no space attached is a plain constant of unbounded
// order.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace finsler {

/// Monomial tables shared by all MultiDual values of one (nvars, order).
class JetSpace {
 public:
  static constexpr int kMaxOrder = 6;
  static constexpr int kMaxVars = 12;

  /// Cached, thread-safe lookup. Throws std::invalid_argument on bad sizes.
  static std::shared_ptr<const JetSpace> get(int nvars, int max_order);

  int nvars() const noexcept { return nvars_; }
  int max_order() const noexcept { return max_order_; }

  /// Number of monomials with total degree <= order.
  std::size_t size(int order) const { return size_by_order_.at(order); }

  /// Monomial exponents, monomials sorted by total degree.
  std::span<const std::uint8_t> exponents(std::size_t monomial) const {
    return {exponents_.data() + monomial * nvars_,
            static_cast<std::size_t>(nvars_)};
  }
  int degree(std::size_t monomial) const { return degree_[monomial]; }

  /// Index of a monomial; -1 when the degree exceeds max_order.
  long index_of(std::span<const int> exponents) const;

  struct Triple {
    std::uint32_t a, b, c;
  };
  /// Product triples (a, b, c) with mono(a) * mono(b) = mono(c), sorted by
  /// degree of c; `product_count(order)` of them have deg(c) <= order.
  std::span<const Triple> products(int order) const {
    return {triples_.data(), triple_count_by_order_.at(order)};
  }

  /// For monomial c (deg < max_order) and variable v: index of c + e_v.
  std::uint32_t raise(std::size_t monomial, int var) const {
    return raise_[monomial * nvars_ + var];
  }

  JetSpace(int nvars, int max_order);

 private:
  int nvars_;
  int max_order_;
  std::vector<std::uint8_t> exponents_;
  std::vector<int> degree_;
  std::vector<std::size_t> size_by_order_;
  std::vector<Triple> triples_;
  std::vector<std::size_t> triple_count_by_order_;
  std::vector<std::uint32_t> raise_;
};

class MultiDual {
 public:
  static constexpr int kConstantOrder = 1 << 20;

  MultiDual() : coeffs_{0.0} {}
  MultiDual(double value) : coeffs_{value} {}  // NOLINT: implicit by design of generic code

  static MultiDual constant(std::shared_ptr<const JetSpace> space, int order,
                            double value);
  /// The coordinate function t_var, evaluated at `value`.
  static MultiDual variable(std::shared_ptr<const JetSpace> space, int order,
                            int var, double value);

  double value() const noexcept { return coeffs_[0]; }
  /// Truncation order; kConstantOrder for plain constants.
  int order() const noexcept { return space_ ? order_ : kConstantOrder; }
  bool is_constant() const noexcept { return space_ == nullptr; }
  const std::shared_ptr<const JetSpace>& space() const noexcept { return space_; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  /// Partial derivative d^k f / dt_{v1} ... dt_{vk} at the expansion point,
  /// given as a list of variable indices (repetition allowed, any order).
  double partial(std::span<const int> vars) const;

  /// d/dt_var as a MultiDual of one order less. Throws std::logic_error
  /// when the order is already exhausted.
  MultiDual derivative(int var) const;

  MultiDual truncated(int order) const;

  MultiDual& operator+=(const MultiDual& o);
  MultiDual& operator-=(const MultiDual& o);
  MultiDual& operator*=(const MultiDual& o);
  MultiDual& operator/=(const MultiDual& o);
  MultiDual& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }
  MultiDual& operator-=(double s) {
    coeffs_[0] -= s;
    return *this;
  }
  MultiDual& operator*=(double s);
  MultiDual& operator/=(double s) { return *this *= 1.0 / s; }

  MultiDual operator-() const;

  friend MultiDual operator+(MultiDual a, const MultiDual& b) { return a += b; }
  friend MultiDual operator-(MultiDual a, const MultiDual& b) { return a -= b; }
  friend MultiDual operator*(const MultiDual& a, const MultiDual& b);
  friend MultiDual operator/(const MultiDual& a, const MultiDual& b);
  friend MultiDual operator+(MultiDual a, double b) { return a += b; }
  friend MultiDual operator+(double a, MultiDual b) { return b += a; }
  friend MultiDual operator-(MultiDual a, double b) { return a -= b; }
  friend MultiDual operator-(double a, const MultiDual& b) { return -b + a; }
  friend MultiDual operator*(MultiDual a, double b) { return a *= b; }
  friend MultiDual operator*(double a, MultiDual b) { return b *= a; }
  friend MultiDual operator/(MultiDual a, double b) { return a /= b; }
  friend MultiDual operator/(double a, const MultiDual& b);

  /// Compose a univariate function given by its derivatives at value():
  /// result = sum_k derivs[k] / k! * (self - value())^k.
  MultiDual compose(std::span<const double> derivs) const;

 private:
  // Aligns two operands on a common space/order; returns the result order.
  static int common_order(const MultiDual& a, const MultiDual& b);
  void promote(const std::shared_ptr<const JetSpace>& space, int order);

  std::shared_ptr<const JetSpace> space_;
  int order_ = 0;
  std::vector<double> coeffs_;
};

MultiDual sqrt(const MultiDual& a);
MultiDual exp(const MultiDual& a);
MultiDual log(const MultiDual& a);
MultiDual sin(const MultiDual& a);
MultiDual cos(const MultiDual& a);
/// Real power; the base value must be positive unless `exponent` is integral.
MultiDual pow(const MultiDual& a, double exponent);
/// Integer power by repeated multiplication (valid for any base value).
MultiDual ipow(const MultiDual& a, int exponent);

/// Value extraction that works for both double and MultiDual in generic code.
inline double value_of(double v) { return v; }
inline double value_of(const MultiDual& v) { return v.value(); }

}  // namespace finsler
