#include "finsler/connection.hpp"

#include <cmath>
#include <stdexcept>

namespace finsler {

LocalGeometry::LocalGeometry(const MetricModel& m, const JetPoint& p, GeometryOptions options)
    : metric_(m, p, options.order) {
  if (options.order < 3) throw std::invalid_argument("LocalGeometry: order must be >= 3");
  const int n = metric_.n;
  const auto& E = metric_.energy;
  const auto& ginv = metric_.g_inv;

  // G^i = 1/4 g^il (d2E/dy^l dx^k y^k - dE/dx^l)
  std::vector<MultiDual> bracket(n);
  for (int l = 0; l < n; ++l) {
    const MultiDual dEl = metric_.dy(E, l);
    MultiDual s = -metric_.dx(E, l);
    for (int k = 0; k < n; ++k) s += metric_.dx(dEl, k) * y(k);
    bracket[l] = s;
  }
  spray_ = JetTensor(n, {kUp});
  for (int i = 0; i < n; ++i) {
    MultiDual s(0.0);
    for (int l = 0; l < n; ++l) s += ginv(i, l) * bracket[l];
    spray_(i) = 0.25 * s;
  }

  nonlinear_ = JetTensor(n, {kUp, kDown});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) nonlinear_(i, j) = dot(spray_(i), j);

  berwald_ = JetTensor(n, {kUp, kDown, kDown});
  if (order() >= 4) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          berwald_(i, j, k) = dot(nonlinear_(i, j), k);
          berwald_(i, k, j) = berwald_(i, j, k);
        }
  }

  // F^i_jk = 1/2 g^il (delta_j g_lk + delta_k g_jl - delta_l g_jk)
  const auto& g = metric_.g;
  Tensor<MultiDual> dg(n, {kDown, kDown, kDown});  // dg(i, j, k) = delta_k g_ij
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        dg(i, j, k) = delta(g(i, j), k);
        dg(j, i, k) = dg(i, j, k);
      }
  cartan_h_ = JetTensor(n, {kUp, kDown, kDown});
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      std::vector<MultiDual> lowered(n);
      for (int l = 0; l < n; ++l) lowered[l] = dg(l, k, j) + dg(j, l, k) - dg(j, k, l);
      for (int i = 0; i < n; ++i) {
        MultiDual s(0.0);
        for (int l = 0; l < n; ++l) s += ginv(i, l) * lowered[l];
        cartan_h_(i, j, k) = 0.5 * s;
        cartan_h_(i, k, j) = cartan_h_(i, j, k);
      }
    }
  if (options.connection_fault != 0.0) {
    for (auto& f : cartan_h_.data()) f += options.connection_fault;
  }

  cartan_v_ = JetTensor(n, {kUp, kDown, kDown});
  const auto& T = metric_.cartan;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        MultiDual s(0.0);
        for (int l = 0; l < n; ++l) s += ginv(i, l) * T(l, j, k);
        cartan_v_(i, j, k) = s;
        cartan_v_(i, k, j) = s;
      }
}

JetTensor LocalGeometry::eta() const {
  JetTensor e(dimension(), {kUp});
  for (int i = 0; i < dimension(); ++i) e(i) = y(i);
  return e;
}

MultiDual LocalGeometry::delta(const MultiDual& f, int k) const {
  if (f.is_constant()) return MultiDual(0.0);
  const int n = dimension();
  MultiDual r = f.derivative(k);
  for (int m = 0; m < n; ++m) r -= nonlinear_(m, k) * f.derivative(n + m);
  return r;
}

JetTensor LocalGeometry::covariant(const JetTensor& w, const JetTensor* gamma,
                                   bool horizontal) const {
  const int n = dimension();
  const int r = w.rank();
  auto signature = w.signature();
  signature.push_back(kDown);
  JetTensor out(n, signature);
  std::vector<int> idx(r + 1);
  for (std::size_t flat = 0; flat < w.size(); ++flat) {
    const auto base = w.unflatten(flat);
    std::copy(base.begin(), base.end(), idx.begin());
    for (int k = 0; k < n; ++k) {
      idx[r] = k;
      MultiDual v = horizontal ? delta(w[flat], k) : dot(w[flat], k);
      if (gamma) {
        auto moved = base;
        for (int s = 0; s < r; ++s) {
          const int original = base[s];
          for (int m = 0; m < n; ++m) {
            moved[s] = m;
            const MultiDual& comp = w.at(moved);
            if (w.signature()[s] == kUp)
              v += (*gamma)(original, m, k) * comp;
            else
              v -= (*gamma)(m, original, k) * comp;
          }
          moved[s] = original;
        }
      }
      out.at(idx) = std::move(v);
    }
  }
  return out;
}

JetTensor LocalGeometry::h_derivative(const JetTensor& w, ConnectionKind kind) const {
  if (kind == ConnectionKind::kBerwald && order() < 4)
    throw std::logic_error("Berwald coefficients need order >= 4");
  return covariant(w, kind == ConnectionKind::kCartan ? &cartan_h_ : &berwald_, true);
}

JetTensor LocalGeometry::v_derivative(const JetTensor& w, ConnectionKind kind) const {
  return covariant(w, kind == ConnectionKind::kCartan ? &cartan_v_ : nullptr, false);
}

TensorField TensorField::from_expressions(int n, std::vector<Variance> signature,
                                          std::vector<Expression> components) {
  std::size_t count = 1;
  for (std::size_t k = 0; k < signature.size(); ++k) count *= static_cast<std::size_t>(n);
  if (components.size() != count)
    throw std::invalid_argument("TensorField: expected " + std::to_string(count) + " components");
  for (const auto& c : components)
    if (c.dimension() != n) throw std::invalid_argument("TensorField: component dimension mismatch");
  auto shared = std::make_shared<const std::vector<Expression>>(std::move(components));
  TensorField f;
  f.signature = signature;
  f.build = [n, signature, shared](const LocalGeometry& geo) {
    if (geo.dimension() != n) throw std::invalid_argument("TensorField: dimension mismatch");
    JetTensor t(n, signature);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = (*shared)[k].evaluate<MultiDual>(geo.variables());
    return t;
  };
  return f;
}

TensorField TensorField::metric_tensor() {
  return {{kDown, kDown}, [](const LocalGeometry& geo) { return geo.g(); }};
}

TensorField TensorField::finsler_function() {
  return {{}, [](const LocalGeometry& geo) {
            JetTensor t(geo.dimension(), {});
            t[0] = geo.metric().finsler;
            return t;
          }};
}

TensorField TensorField::fundamental_vector() {
  return {{kUp}, [](const LocalGeometry& geo) { return geo.eta(); }};
}

ConnectionData connection_data(const LocalGeometry& geo) {
  ConnectionData d;
  for (const auto& g : geo.spray().data()) d.spray.push_back(g.value());
  d.nonlinear = values(geo.nonlinear());
  d.cartan_h = values(geo.cartan_h());
  d.cartan_v = values(geo.cartan_v());
  d.berwald = values(geo.berwald());
  d.at = geo.at();
  return d;
}

SprayData spray_and_nonlinear(const MetricModel& m, const JetPoint& p) {
  LocalGeometry geo(m, p, {.order = 3});
  SprayData d;
  for (const auto& g : geo.spray().data()) d.spray.push_back(g.value());
  d.nonlinear = values(geo.nonlinear());
  return d;
}

ConnectionData cartan_coefficients(const MetricModel& m, const JetPoint& p) {
  return connection_data(LocalGeometry(m, p, {.order = 4}));
}

PointTensor h_cov_derive(const MetricModel& m, const JetPoint& p, const TensorField& field,
                         ConnectionKind kind) {
  LocalGeometry geo(m, p, {.order = 4});
  return {values(geo.h_derivative(field.build(geo), kind)), p, {}};
}

PointTensor v_cov_derive(const MetricModel& m, const JetPoint& p, const TensorField& field,
                         ConnectionKind kind) {
  LocalGeometry geo(m, p, {.order = 4});
  return {values(geo.v_derivative(field.build(geo), kind)), p, {}};
}

CartanAxiomResiduals cartan_axioms(const LocalGeometry& geo) {
  const int n = geo.dimension();
  const auto g = values(geo.g());
  const auto T = values(geo.cartan_tensor());
  const auto F = values(geo.cartan_h());
  const auto C = values(geo.cartan_v());
  const auto N = values(geo.nonlinear());
  const auto& y = geo.at().y;
  CartanAxiomResiduals r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double h = geo.delta(geo.g()(i, j), k).value();
        double v = geo.dot(geo.g()(i, j), k).value();
        for (int l = 0; l < n; ++l) {
          h -= F(l, i, k) * g(l, j) + F(l, j, k) * g(i, l);
          v -= C(l, i, k) * g(l, j) + C(l, j, k) * g(i, l);
        }
        r.h_metricity = std::max(r.h_metricity, std::abs(h));
        r.v_metricity = std::max(r.v_metricity, std::abs(v));
        r.f_symmetry = std::max(r.f_symmetry, std::abs(F(i, j, k) - F(i, k, j)));
        // g(T(e_i, e_j), e_k) with T(e_i, e_j) = C^m_ji e_m
        double tij_k = 0.0, tik_j = 0.0;
        for (int m = 0; m < n; ++m) {
          tij_k += g(m, k) * C(m, j, i);
          tik_j += g(m, j) * C(m, k, i);
        }
        r.t_symmetry = std::max(r.t_symmetry, std::abs(tij_k - tik_j));
        r.v_metricity = std::max(r.v_metricity, std::abs(geo.dot(geo.g()(i, j), k).value() -
                                                         2.0 * T(i, j, k)));
      }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double s = -N(i, k);
      for (int j = 0; j < n; ++j) s += F(i, j, k) * y[j];
      r.deflection = std::max(r.deflection, std::abs(s));
    }
  return r;
}

BerwaldAxiomResiduals berwald_axioms(const LocalGeometry& geo) {
  const int n = geo.dimension();
  const auto B = values(geo.berwald());
  const auto N = values(geo.nonlinear());
  const auto& y = geo.at().y;
  BerwaldAxiomResiduals r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double c = -N(i, j);
      for (int k = 0; k < n; ++k) {
        r.symmetry = std::max(r.symmetry, std::abs(B(i, j, k) - B(i, k, j)));
        c += B(i, j, k) * y[k];
      }
      r.contraction = std::max(r.contraction, std::abs(c));
    }
  for (int k = 0; k < n; ++k)
    r.h_derivative_of_l =
        std::max(r.h_derivative_of_l, std::abs(geo.delta(geo.metric().finsler, k).value()));
  return r;
}

}  // namespace finsler
