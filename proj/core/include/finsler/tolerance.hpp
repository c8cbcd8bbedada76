#pragma once

#include <algorithm>

namespace finsler {

/// Residual semantics shared by every check: A = B holds when
/// max|A - B| < abs + rel * max(1, scale), scale = max(|A|, |B|).
struct Tolerance {
  double abs = 1e-8;
  double rel = 1e-7;

  double bound(double scale = 0.0) const { return abs + rel * std::max(1.0, scale); }
  bool holds(double residual, double scale = 0.0) const { return residual < bound(scale); }
  Tolerance scaled(double factor) const { return {abs * factor, rel * factor}; }
};

}  // namespace finsler
