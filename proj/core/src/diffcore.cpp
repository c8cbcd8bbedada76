#include "finsler/diffcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace finsler {

ScalarField ScalarField::from_expression(Expression expr) {
  auto shared = std::make_shared<const Expression>(std::move(expr));
  ScalarField f;
  f.n = shared->dimension();
  f.evaluate = [shared](std::span<const double> v) { return shared->evaluate<double>(v); };
  f.evaluate_jet = [shared](std::span<const MultiDual> v) {
    return shared->evaluate<MultiDual>(v);
  };
  return f;
}

std::vector<MultiDual> seed_variables(std::span<const double> point, int order) {
  const int nvars = static_cast<int>(point.size());
  auto space = JetSpace::get(nvars, order);
  std::vector<MultiDual> vars;
  vars.reserve(nvars);
  for (int v = 0; v < nvars; ++v) vars.push_back(MultiDual::variable(space, order, v, point[v]));
  return vars;
}

double derive(const ScalarField& f, std::span<const double> point,
              std::span<const int> multi_index) {
  const int order = static_cast<int>(multi_index.size());
  if (order > 4) throw std::invalid_argument("derive: total order must be <= 4");
  if (static_cast<int>(point.size()) != 2 * f.n)
    throw std::invalid_argument("derive: point must have 2n coordinates");
  for (int v : multi_index)
    if (v < 0 || v >= 2 * f.n) throw std::invalid_argument("derive: variable out of range");
  const auto vars = seed_variables(point, std::max(order, 0));
  return f.evaluate_jet(vars).partial(multi_index);
}

namespace {

double nested_difference(const ScalarField& f, std::vector<double>& point,
                         std::span<const int> multi_index, double h) {
  if (multi_index.empty()) return f.evaluate(point);
  const int v = multi_index.front();
  const auto rest = multi_index.subspan(1);
  const double saved = point[v];
  point[v] = saved + h;
  const double plus = nested_difference(f, point, rest, h);
  point[v] = saved - h;
  const double minus = nested_difference(f, point, rest, h);
  point[v] = saved;
  return (plus - minus) / (2.0 * h);
}

}  // namespace

double central_difference(const ScalarField& f, std::span<const double> point,
                          std::span<const int> multi_index, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("central_difference: step must be positive");
  std::vector<double> p(point.begin(), point.end());
  const double coarse = nested_difference(f, p, multi_index, h);
  const double fine = nested_difference(f, p, multi_index, h / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

FdCheck fd_check(const ScalarField& f, std::span<const double> point,
                 std::span<const int> multi_index, double h) {
  FdCheck r;
  r.ad_value = derive(f, point, multi_index);
  r.fd_value = central_difference(f, point, multi_index, h);
  r.rel_error = std::abs(r.ad_value - r.fd_value) / std::max(1.0, std::abs(r.ad_value));
  return r;
}

double default_fd_step(int order) {
  switch (order) {
    case 0:
    case 1:
      return 1e-3;
    case 2:
      return 4e-3;
    case 3:
      return 1e-2;
    default:
      return 2e-2;
  }
}

std::vector<std::vector<int>> multi_indices(int nvars, int max_order) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  auto recurse = [&](auto&& self, int start) -> void {
    if (!current.empty()) out.push_back(current);
    if (static_cast<int>(current.size()) == max_order) return;
    for (int v = start; v < nvars; ++v) {
      current.push_back(v);
      self(self, v);
      current.pop_back();
    }
  };
  recurse(recurse, 0);
  return out;
}

}  // namespace finsler
