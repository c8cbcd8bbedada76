#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "finsler/multidual.hpp"

namespace finsler {

enum class Variance { kCovariant, kContravariant };

inline constexpr Variance kDown = Variance::kCovariant;
inline constexpr Variance kUp = Variance::kContravariant;

/// A base point x and a non-zero direction y.
struct JetPoint {
  std::vector<double> x;
  std::vector<double> y;

  int dimension() const noexcept { return static_cast<int>(x.size()); }
  /// (x1..xn, y1..yn)
  std::vector<double> coordinates() const {
    std::vector<double> c = x;
    c.insert(c.end(), y.begin(), y.end());
    return c;
  }
};

/// Dense component array of a pi-tensor in natural coordinates. Slot k has
/// variance signature()[k]; components are stored row-major, n^rank of them.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, std::vector<Variance> signature, T fill = T(0.0))
      : n_(n), signature_(std::move(signature)) {
    std::size_t count = 1;
    for (std::size_t k = 0; k < signature_.size(); ++k) count *= static_cast<std::size_t>(n);
    data_.assign(count, fill);
  }

  int dimension() const noexcept { return n_; }
  int rank() const noexcept { return static_cast<int>(signature_.size()); }
  const std::vector<Variance>& signature() const noexcept { return signature_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  template <typename... I>
  T& operator()(I... idx) {
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <typename... I>
  const T& operator()(I... idx) const {
    return data_[offset({static_cast<int>(idx)...})];
  }

  T& at(std::span<const int> idx) { return data_[offset(idx)]; }
  const T& at(std::span<const int> idx) const { return data_[offset(idx)]; }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  /// Multi-index of a flat position.
  std::vector<int> unflatten(std::size_t flat) const {
    std::vector<int> idx(signature_.size());
    for (int k = rank() - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(flat % n_);
      flat /= n_;
    }
    return idx;
  }

 private:
  std::size_t offset(std::initializer_list<int> idx) const {
    return offset(std::span<const int>(idx.begin(), idx.size()));
  }
  std::size_t offset(std::span<const int> idx) const {
    if (idx.size() != signature_.size())
      throw std::out_of_range("Tensor: index count does not match rank");
    std::size_t off = 0;
    for (int i : idx) off = off * n_ + static_cast<std::size_t>(i);
    return off;
  }

  int n_ = 0;
  std::vector<Variance> signature_;
  std::vector<T> data_;
};

using JetTensor = Tensor<MultiDual>;

/// Point values (constant Taylor coefficients) of a jet tensor.
inline Tensor<double> values(const JetTensor& t) {
  Tensor<double> out(t.dimension(), t.signature());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = t[k].value();
  return out;
}

inline double max_abs(const Tensor<double>& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

/// max |a - b| over all components.
inline double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

struct SlotSymmetry {
  int first;
  int second;
  bool antisymmetric = false;
};

/// Component array evaluated at one JetPoint with its declared slot
/// symmetries.
struct PointTensor {
  Tensor<double> components;
  JetPoint at;
  std::vector<SlotSymmetry> symmetries;

  /// Largest violation of the declared symmetries.
  double symmetry_defect() const {
    double defect = 0.0;
    const auto& t = components;
    for (std::size_t k = 0; k < t.size(); ++k) {
      auto idx = t.unflatten(k);
      for (const auto& s : symmetries) {
        std::swap(idx[s.first], idx[s.second]);
        const double other = t.at(idx);
        std::swap(idx[s.first], idx[s.second]);
        const double d = s.antisymmetric ? t[k] + other : t[k] - other;
        defect = std::max(defect, std::abs(d));
      }
    }
    return defect;
  }

  /// Throws std::logic_error when a declared symmetry is violated by more
  /// than `tol` in absolute value.
  void check_symmetries(double tol = 1e-10) const {
    const double d = symmetry_defect();
    if (d > tol)
      throw std::logic_error("PointTensor: declared symmetry violated by " + std::to_string(d));
  }
};

}  // namespace finsler
