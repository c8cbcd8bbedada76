#pragma once

#include <functional>
#include <span>
#include <vector>

#include "finsler/expression.hpp"
#include "finsler/multidual.hpp"

namespace finsler {

/// A scalar function of (x, y) that can be evaluated both on plain doubles
/// and on MultiDual jets. Variables are ordered (x1..xn, y1..yn).
struct ScalarField {
  int n = 0;
  std::function<double(std::span<const double>)> evaluate;
  std::function<MultiDual(std::span<const MultiDual>)> evaluate_jet;

  static ScalarField from_expression(Expression expr);
};

/// Seeds the 2n coordinate jets at `point` = (x, y) with truncation `order`.
std::vector<MultiDual> seed_variables(std::span<const double> point, int order);

/// d^|I| f / d(x,y)^I at `point`. `multi_index` lists variable indices in
/// 0..2n-1 (x first, then y), repetition allowed; |I| <= 4.
double derive(const ScalarField& f, std::span<const double> point,
              std::span<const int> multi_index);

struct FdCheck {
  double ad_value = 0.0;
  double fd_value = 0.0;
  double rel_error = 0.0;  // |ad - fd| / max(1, |ad|)
};

/// Compares derive() with a nested central difference, Richardson
/// extrapolated from steps h and h/2.
FdCheck fd_check(const ScalarField& f, std::span<const double> point,
                 std::span<const int> multi_index, double h);

/// Richardson-extrapolated nested central difference alone. Evaluates only
/// `f.evaluate` on doubles.
double central_difference(const ScalarField& f, std::span<const double> point,
                          std::span<const int> multi_index, double h);

/// Step size suited to a derivative of the given order on O(1)-scaled data.
double default_fd_step(int order);

/// All multi-indices (non-decreasing variable lists) over `nvars` variables
/// with 1 <= length <= max_order.
std::vector<std::vector<int>> multi_indices(int nvars, int max_order);

}  // namespace finsler
