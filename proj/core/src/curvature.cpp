#include "finsler/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace finsler {
namespace {

template <typename T>
Tensor<T> lower_last_impl(const Tensor<T>& t, const Tensor<T>& g) {
  const int n = t.dimension();
  const int r = t.rank();
  if (r == 0 || t.signature().back() != kUp)
    throw std::invalid_argument("lower_last: last slot must be contravariant");
  auto sig = t.signature();
  sig.back() = kDown;
  Tensor<T> out(n, sig);
  for (std::size_t base = 0; base < t.size(); base += n)
    for (int w = 0; w < n; ++w) {
      T s(0.0);
      for (int i = 0; i < n; ++i) s += t[base + i] * g(i, w);
      out[base + w] = s;
    }
  return out;
}

template <typename T>
Tensor<T> contract_impl(const Tensor<T>& t, int slot, std::span<const T> v) {
  const int n = t.dimension();
  auto sig = t.signature();
  if (slot < 0 || slot >= t.rank()) throw std::out_of_range("contract: bad slot");
  sig.erase(sig.begin() + slot);
  Tensor<T> out(n, sig);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    auto idx = out.unflatten(flat);
    idx.insert(idx.begin() + slot, 0);
    T s(0.0);
    for (int m = 0; m < n; ++m) {
      idx[slot] = m;
      s += t.at(idx) * v[m];
    }
    out[flat] = s;
  }
  return out;
}

double max_abs_t(const Tensor<double>& t) { return max_abs(t); }

}  // namespace

JetTensor lower_last(const JetTensor& t, const JetTensor& g) { return lower_last_impl(t, g); }
Tensor<double> lower_last(const Tensor<double>& t, const Tensor<double>& g) {
  return lower_last_impl(t, g);
}
JetTensor contract(const JetTensor& t, int slot, std::span<const MultiDual> v) {
  return contract_impl(t, slot, v);
}
Tensor<double> contract(const Tensor<double>& t, int slot, std::span<const double> v) {
  return contract_impl(t, slot, v);
}

CurvatureJets::CurvatureJets(const LocalGeometry& geo) {
  if (geo.order() < 4) throw std::invalid_argument("CurvatureJets: geometry order must be >= 4");
  const int n = geo.dimension();
  const auto& N = geo.nonlinear();
  const auto& F = geo.cartan_h();
  const auto& C = geo.cartan_v();
  const auto& B = geo.berwald();

  torsion = JetTensor(n, {kDown, kDown, kUp});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i) torsion(a, b, i) = C(i, a, b);

  // [delta_a, delta_b] = Rn(m, a, b) d/dy^m
  JetTensor Rn(n, {kUp, kDown, kDown});
  for (int m = 0; m < n; ++m)
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        Rn(m, a, b) = geo.delta(N(m, a), b) - geo.delta(N(m, b), a);
        Rn(m, b, a) = -Rn(m, a, b);
      }

  // dF(i, c, b, a) = delta_a F^i_cb, etc.
  JetTensor hF(n, {kUp, kDown, kDown, kDown}), vF(n, {kUp, kDown, kDown, kDown});
  JetTensor hC(n, {kUp, kDown, kDown, kDown}), vC(n, {kUp, kDown, kDown, kDown});
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < n; ++c)
      for (int b = c; b < n; ++b)
        for (int a = 0; a < n; ++a) {
          hF(i, c, b, a) = geo.delta(F(i, c, b), a);
          hF(i, b, c, a) = hF(i, c, b, a);
          vF(i, c, b, a) = geo.dot(F(i, c, b), a);
          vF(i, b, c, a) = vF(i, c, b, a);
          hC(i, c, b, a) = geo.delta(C(i, c, b), a);
          hC(i, b, c, a) = hC(i, c, b, a);
          vC(i, c, b, a) = geo.dot(C(i, c, b), a);
          vC(i, b, c, a) = vC(i, c, b, a);
        }

  const std::vector<Variance> sig{kDown, kDown, kDown, kUp};
  R = JetTensor(n, sig);
  P = JetTensor(n, sig);
  S = JetTensor(n, sig);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i) {
          MultiDual r = hF(i, c, b, a) - hF(i, c, a, b);
          MultiDual p = hC(i, c, b, a) - vF(i, c, a, b);
          MultiDual s = vC(i, c, b, a) - vC(i, c, a, b);
          for (int m = 0; m < n; ++m) {
            r += F(m, c, b) * F(i, m, a) - F(m, c, a) * F(i, m, b) - Rn(m, a, b) * C(i, c, m);
            p += C(m, c, b) * F(i, m, a) - F(m, c, a) * C(i, m, b) - B(m, a, b) * C(i, c, m);
            s += C(m, c, b) * C(i, m, a) - C(m, c, a) * C(i, m, b);
          }
          // Standard-sign components computed above; stored with the opposite sign.
          R(a, b, c, i) = -r;
          P(a, b, c, i) = -p;
          S(a, b, c, i) = -s;
        }

  const auto y = geo.eta();
  const std::span<const MultiDual> ys = y.data();
  Rhat = contract(R, 2, ys);
  Phat = contract(P, 2, ys);
  Shat = contract(S, 2, ys);
}

CurvatureData curvature_data(const LocalGeometry& geo, const CurvatureJets& k) {
  const int n = geo.dimension();
  const auto g = values(geo.g());
  const auto ginv = values(geo.g_inv());
  CurvatureData d;
  d.R_mixed = values(k.R);
  d.P_mixed = values(k.P);
  d.S_mixed = values(k.S);
  d.R = lower_last(d.R_mixed, g);
  d.P = lower_last(d.P_mixed, g);
  d.S = lower_last(d.S_mixed, g);
  d.Rhat = values(k.Rhat);
  d.Phat = values(k.Phat);
  d.Shat = values(k.Shat);
  d.ric_v = Tensor<double>(n, {kDown, kDown});
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int b = 0; b < n; ++b) s += d.S_mixed(a, b, c, b);
      d.ric_v(a, c) = s;
    }
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) d.sc_v += ginv(a, c) * d.ric_v(a, c);
  d.at = geo.at();
  return d;
}

CurvatureData curvatures(const MetricModel& m, const JetPoint& p) {
  LocalGeometry geo(m, p, {.order = 4});
  return curvature_data(geo, CurvatureJets(geo));
}

const IdentityResult& IdentityBatteryReport::find(const std::string& name) const {
  for (const auto& r : identities)
    if (r.name == name) return r;
  throw std::out_of_range("identity battery has no entry '" + name + "'");
}

const std::vector<std::string>& identity_names() {
  static const std::vector<std::string> names{
      "g(P(X,Y)Z,Z) = 0",
      "Phat = nabla_{beta eta} T",
      "P(X,eta)Z = 0",
      "g(R(X,Y)Z,Z) = 0",
      "R(X,Y,Z,W) = -R(X,Y,W,Z)",
      "(nabla_{gamma eta} R) = 0",
      "P expansion in nabla T and Phat",
      "T(X,eta) = 0",
      "Shat = 0",
      "g((nabla_{beta Z} T)(X,Y),W) symmetric in Y,W",
      "S(X,Y,Z,W) skew in X,Y and in Z,W",
  };
  return names;
}

std::vector<std::pair<double, double>> identity_residuals(const LocalGeometry& geo) {
  if (geo.order() < 5) throw std::invalid_argument("identity_residuals: geometry order must be >= 5");
  const int n = geo.dimension();
  const CurvatureJets k(geo);
  const auto g = values(geo.g());
  const auto& y = geo.at().y;
  const std::span<const double> ys(y);

  const auto P = values(k.P);
  const auto R = values(k.R);
  const auto S = values(k.S);
  const auto Pl = lower_last(P, g);
  const auto Rl = lower_last(R, g);
  const auto Sl = lower_last(S, g);
  const auto Phat = values(k.Phat);
  const auto torsion = values(k.torsion);
  const auto Tl = lower_last(torsion, g);
  // DT(a, b, i, z) = (nabla_{beta e_z} T)(e_a, e_b)^i
  const auto DT = values(geo.h_derivative(k.torsion));
  Tensor<double> DTl(n, {kDown, kDown, kDown, kDown});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int w = 0; w < n; ++w)
        for (int z = 0; z < n; ++z) {
          double s = 0.0;
          for (int i = 0; i < n; ++i) s += DT(a, b, i, z) * g(i, w);
          DTl(a, b, w, z) = s;
        }

  std::vector<std::pair<double, double>> out;
  auto diag_form = [&](const Tensor<double>& t) {
    // t(a, b, Z, Z) for Z = e_c + e_d over all pairs.
    double res = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = c; d < n; ++d) {
            const double v = c == d ? t(a, b, c, c)
                                    : t(a, b, c, c) + t(a, b, c, d) + t(a, b, d, c) + t(a, b, d, d);
            res = std::max(res, std::abs(v));
          }
    return std::pair{res, max_abs_t(t)};
  };

  out.push_back(diag_form(Pl));

  {
    const auto lhs = contract(DT, 3, ys);
    out.emplace_back(max_abs_diff(lhs, Phat), std::max(max_abs(lhs), max_abs(Phat)));
  }
  {
    const auto pe = contract(P, 1, ys);
    out.emplace_back(max_abs(pe), max_abs(P));
  }
  out.push_back(diag_form(Rl));
  {
    double res = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int w = 0; w < n; ++w) res = std::max(res, std::abs(Rl(a, b, c, w) + Rl(a, b, w, c)));
    out.emplace_back(res, max_abs(Rl));
  }
  {
    const auto vR = values(geo.v_derivative(k.R));
    const auto ve = contract(vR, 4, ys);
    out.emplace_back(max_abs(ve), max_abs(vR));
  }
  {
    double res = 0.0, scale = max_abs(Pl);
    for (int x = 0; x < n; ++x)
      for (int yy = 0; yy < n; ++yy)
        for (int z = 0; z < n; ++z)
          for (int w = 0; w < n; ++w) {
            double rhs = DTl(yy, x, w, z) - DTl(yy, x, z, w);
            for (int j = 0; j < n; ++j)
              rhs += -Tl(x, w, j) * Phat(z, yy, j) + Tl(x, z, j) * Phat(w, yy, j);
            scale = std::max(scale, std::abs(rhs));
            res = std::max(res, std::abs(Pl(x, yy, z, w) - rhs));
          }
    out.emplace_back(res, scale);
  }
  {
    const auto te = contract(torsion, 1, ys);
    out.emplace_back(max_abs(te), max_abs(torsion));
  }
  out.emplace_back(max_abs(values(k.Shat)), max_abs(S));
  {
    double res = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int w = 0; w < n; ++w)
          for (int z = 0; z < n; ++z) res = std::max(res, std::abs(DTl(a, b, w, z) - DTl(a, w, b, z)));
    out.emplace_back(res, max_abs(DTl));
  }
  {
    double res = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int w = 0; w < n; ++w)
            res = std::max({res, std::abs(Sl(a, b, c, w) + Sl(b, a, c, w)),
                            std::abs(Sl(a, b, c, w) + Sl(a, b, w, c))});
    out.emplace_back(res, max_abs(Sl));
  }
  return out;
}

IdentityBatteryReport identity_battery(const MetricModel& m, const std::vector<JetPoint>& corpus,
                                       const Tolerance& tol, GeometryOptions options) {
  options.order = std::max(options.order, 5);
  const auto& names = identity_names();
  std::vector<std::pair<double, double>> worst(names.size(), {0.0, 0.0});
  for (const auto& p : corpus) {
    LocalGeometry geo(m, p, options);
    const auto r = identity_residuals(geo);
    for (std::size_t k = 0; k < r.size(); ++k) {
      worst[k].first = std::max(worst[k].first, r[k].first);
      worst[k].second = std::max(worst[k].second, r[k].second);
    }
  }
  IdentityBatteryReport report;
  report.points = static_cast<int>(corpus.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    IdentityResult r{names[k], worst[k].first, worst[k].second, tol.bound(worst[k].second), true};
    r.holds = tol.holds(r.residual, r.scale);
    report.identities.push_back(std::move(r));
  }
  return report;
}

BridgeResidual berwald_bridge_check(const LocalGeometry& geo, const TensorField& field) {
  if (field.signature != std::vector<Variance>{kUp})
    throw std::invalid_argument("berwald_bridge_check: field must be a pi-vector field");
  const int n = geo.dimension();
  const CurvatureJets k(geo);
  const JetTensor Y = field.build(geo);
  const auto cart_v = values(geo.v_derivative(Y, ConnectionKind::kCartan));
  const auto berw_v = values(geo.v_derivative(Y, ConnectionKind::kBerwald));
  const auto cart_h = values(geo.h_derivative(Y, ConnectionKind::kCartan));
  const auto berw_h = values(geo.h_derivative(Y, ConnectionKind::kBerwald));
  const auto torsion = values(k.torsion);
  const auto Phat = values(k.Phat);
  const auto yv = values(Y);
  BridgeResidual r;
  // Arrays are (i, x): derivative of Y^i along e_x.
  for (int i = 0; i < n; ++i)
    for (int x = 0; x < n; ++x) {
      double t = 0.0, ph = 0.0;
      for (int m = 0; m < n; ++m) {
        t += torsion(x, m, i) * yv(m);
        ph += Phat(x, m, i) * yv(m);
      }
      r.vertical = std::max(r.vertical, std::abs(berw_v(i, x) - cart_v(i, x) + t));
      r.horizontal = std::max(r.horizontal, std::abs(berw_h(i, x) - cart_h(i, x) - ph));
    }
  return r;
}

BridgeResidual berwald_bridge_check(const MetricModel& m, const JetPoint& p,
                                    const TensorField& field) {
  return berwald_bridge_check(LocalGeometry(m, p, {.order = 4}), field);
}

}  // namespace finsler
