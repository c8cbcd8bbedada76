#pragma once

// Reference computations that never touch the jet arithmetic: plain doubles,
// tensor-product central-difference stencils, Richardson extrapolation.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <finsler/classify.hpp>

namespace oracle {

using Vec = std::vector<double>;
using Fn = std::function<double(const Vec&)>;

// Central stencils (offset, weight) for derivative orders 1..4, all with an
// even error expansion in h.
inline const std::vector<std::pair<int, double>>& stencil(int k) {
  static const std::array<std::vector<std::pair<int, double>>, 5> s = {{
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
      {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
  }};
  return s.at(k);
}

// d^|I| f / dv^I with the multiplicity of each variable given in `orders`.
inline double stencil_derivative(const Fn& f, const Vec& at, const std::vector<int>& orders, double h) {
  std::vector<int> vars;
  for (std::size_t v = 0; v < orders.size(); ++v)
    if (orders[v] > 0) vars.push_back(static_cast<int>(v));
  int total = 0;
  for (int o : orders) total += o;
  double sum = 0.0;
  std::vector<std::size_t> pos(vars.size(), 0);
  while (true) {
    Vec p = at;
    double w = 1.0;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const auto& [off, wt] = stencil(orders[vars[k]])[pos[k]];
      p[vars[k]] += off * h;
      w *= wt;
    }
    sum += w * f(p);
    std::size_t k = 0;
    for (; k < vars.size(); ++k) {
      if (++pos[k] < stencil(orders[vars[k]]).size()) break;
      pos[k] = 0;
    }
    if (k == vars.size()) break;
  }
  return sum / std::pow(h, total);
}

inline double step_for(int order) {
  static const double h[] = {0.0, 2e-3, 1e-2, 2e-2, 4e-2};
  return h[std::min(order, 4)];
}

// Richardson extrapolation over h, h/2, ... (levels = 1: error O(h^4),
// levels = 2: O(h^6)). The default steps are sized for levels = 2, where
// fourth derivatives of sqrt-type energies balance truncation and roundoff.
inline double derivative(const Fn& f, const Vec& at, const std::vector<int>& orders, double h = 0.0,
                         int levels = 2) {
  int total = 0;
  for (int o : orders) total += o;
  if (h == 0.0) h = step_for(total);
  std::vector<double> d;
  for (int l = 0; l <= levels; ++l) d.push_back(stencil_derivative(f, at, orders, h / (1 << l)));
  for (int l = 1; l <= levels; ++l) {
    const double r = std::pow(4.0, l);
    for (int k = levels; k >= l; --k) d[k] = (r * d[k] - d[k - 1]) / (r - 1.0);
  }
  return d[levels];
}

inline std::vector<int> unit(int nvars, int v, int times = 1) {
  std::vector<int> o(nvars, 0);
  o[v] = times;
  return o;
}

// L^2 on plain doubles; the variable vector is (x, y).
inline Fn energy(const finsler::MetricModel& m) {
  const int n = m.dimension();
  return [&m, n](const Vec& v) {
    return m.energy<double>(std::span<const double>(v.data(), n), std::span<const double>(v.data() + n, n));
  };
}

// Fundamental tensor by finite differences of L^2/2 in y.
inline Eigen::MatrixXd fundamental_tensor(const finsler::MetricModel& m, const finsler::JetPoint& p) {
  const int n = m.dimension();
  const auto e = energy(m);
  const Vec at = p.coordinates();
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto o = unit(2 * n, n + i);
      o[n + j] += 1;
      g(i, j) = 0.5 * derivative(e, at, o);
    }
  return g;
}

// Riemannian a_ij(x) as a matrix-valued function.
using MatrixFn = std::function<Eigen::MatrixXd(const Vec&)>;

inline MatrixFn riemannian_matrix(const std::vector<finsler::Expression>& a, int n) {
  return [a, n](const Vec& x) {
    Vec v = x;
    v.resize(2 * n, 0.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = a[i * n + j].evaluate<double>(v);
    return m;
  };
}

// Gamma[i](j, k): Christoffel symbols of the second kind.
using Christoffel = std::vector<Eigen::MatrixXd>;

inline Christoffel christoffel(const MatrixFn& a, const Vec& x) {
  const int n = static_cast<int>(x.size());
  std::vector<Eigen::MatrixXd> da(n);  // da[k](i, j) = d_k a_ij
  for (int k = 0; k < n; ++k) {
    da[k] = Eigen::MatrixXd(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        da[k](i, j) = derivative([&](const Vec& v) { return a(v)(i, j); }, x, unit(n, k), 1e-2, 2);
  }
  const Eigen::MatrixXd inv = a(x).inverse();
  Christoffel G(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          G[i](j, k) += 0.5 * inv(i, l) * (da[j](l, k) + da[k](j, l) - da[l](j, k));
  return G;
}

// Riemann tensor in the convention R(e_k, e_l) e_j = Rm[i][j](k, l) e_i with
// R(X, Y) = [D_X, D_Y] - D_[X,Y]; the unit sphere has sectional curvature +1.
inline std::vector<std::vector<Eigen::MatrixXd>> riemann(const MatrixFn& a, const Vec& x) {
  const int n = static_cast<int>(x.size());
  const auto G = christoffel(a, x);
  // dG[m][i](j, k) = d_m Gamma^i_jk
  std::vector<Christoffel> dG(n);
  for (int m = 0; m < n; ++m) {
    dG[m] = Christoffel(n, Eigen::MatrixXd(n, n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          dG[m][i](j, k) = derivative([&](const Vec& v) { return christoffel(a, v)[i](j, k); }, x,
                                      unit(n, m), 2e-2, 2);
  }
  std::vector<std::vector<Eigen::MatrixXd>> R(n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = dG[k][i](l, j) - dG[l][i](k, j);
          for (int m = 0; m < n; ++m) v += G[i](k, m) * G[m](l, j) - G[i](l, m) * G[m](k, j);
          R[i][j](k, l) = v;
        }
  return R;
}

// Riemannian Hessian of a scalar f: Hess_ij = d_i d_j f - Gamma^k_ij d_k f.
inline Eigen::MatrixXd hessian(const MatrixFn& a, const Fn& f, const Vec& x) {
  const int n = static_cast<int>(x.size());
  const auto G = christoffel(a, x);
  Eigen::VectorXd df(n);
  for (int k = 0; k < n; ++k) df(k) = derivative(f, x, unit(n, k));
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto o = unit(n, i);
      o[j] += 1;
      double v = derivative(f, x, o);
      for (int k = 0; k < n; ++k) v -= G[k](i, j) * df(k);
      H(i, j) = v;
    }
  return H;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
