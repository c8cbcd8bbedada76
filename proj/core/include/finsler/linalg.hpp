#pragma once

// Small dense linear algebra generic over double and MultiDual.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "finsler/multidual.hpp"

namespace finsler {

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse of a row-major n x n matrix by Gauss-Jordan elimination with
/// partial pivoting on the point values. Throws SingularMatrixError when a
/// pivot is below `pivot_floor` relative to the largest entry.
template <typename T>
std::vector<T> invert(std::vector<T> a, int n, double pivot_floor = 1e-13) {
  std::vector<T> inv(static_cast<std::size_t>(n) * n, T(0.0));
  for (int i = 0; i < n; ++i) inv[i * n + i] = T(1.0);
  double scale = 0.0;
  for (const auto& v : a) scale = std::max(scale, std::abs(value_of(v)));
  if (scale == 0.0) throw SingularMatrixError("invert: zero matrix");
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(value_of(a[r * n + col])) > std::abs(value_of(a[pivot * n + col]))) pivot = r;
    if (std::abs(value_of(a[pivot * n + col])) < pivot_floor * scale)
      throw SingularMatrixError("invert: matrix is singular");
    if (pivot != col) {
      for (int k = 0; k < n; ++k) {
        std::swap(a[col * n + k], a[pivot * n + k]);
        std::swap(inv[col * n + k], inv[pivot * n + k]);
      }
    }
    const T p = a[col * n + col];
    for (int k = 0; k < n; ++k) {
      a[col * n + k] = a[col * n + k] / p;
      inv[col * n + k] = inv[col * n + k] / p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const T factor = a[r * n + col];
      for (int k = 0; k < n; ++k) {
        a[r * n + k] -= factor * a[col * n + k];
        inv[r * n + k] -= factor * inv[col * n + k];
      }
    }
  }
  return inv;
}

}  // namespace finsler
