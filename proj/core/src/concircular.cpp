#include "finsler/concircular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace finsler {
namespace {

struct Fit {
  JetTensor alpha;  // (Down)
  MultiDual psi;
  double residual = 0.0;
  double scale = 0.0;
  double residual_v = 0.0;
  bool determinate = true;
};

JetTensor zeta_jets(const LocalGeometry& geo, const CandidateField& cand) {
  const int n = geo.dimension();
  if (cand.dimension() != n || static_cast<int>(cand.components.size()) != n)
    throw std::invalid_argument("candidate '" + cand.name + "' does not match the metric dimension");
  JetTensor z(n, {kUp});
  for (int i = 0; i < n; ++i) z(i) = cand.components[i].evaluate<MultiDual>(geo.variables());
  return z;
}

// Least squares for M^i_k = alpha_k zeta^i + psi delta^i_k:
//   psi = (tr M - zeta.M.zeta / |zeta|^2) / (n - 1),
//   alpha_k = ((zeta.M)_k - psi zeta_k) / |zeta|^2.
Fit fit(const LocalGeometry& geo, const JetTensor& zeta, ConnectionKind kind) {
  const int n = geo.dimension();
  const JetTensor M = geo.h_derivative(zeta, kind);
  const JetTensor V = geo.v_derivative(zeta, kind);
  Fit f;
  f.alpha = JetTensor(n, {kDown});
  f.scale = max_abs(values(M));
  f.residual_v = max_abs(values(V));

  MultiDual zz(0.0);
  for (int i = 0; i < n; ++i) zz += zeta(i) * zeta(i);
  double zmax = 0.0;
  for (int i = 0; i < n; ++i) zmax = std::max(zmax, std::abs(zeta(i).value()));
  if (zz.value() <= 1e-24 * std::max(1.0, f.scale * f.scale) || zmax == 0.0) {
    f.determinate = false;
    f.residual = std::numeric_limits<double>::infinity();
    return f;
  }

  std::vector<MultiDual> zM(n, MultiDual(0.0));
  MultiDual trace(0.0), zMz(0.0);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) zM[k] += zeta(i) * M(i, k);
    trace += M(k, k);
    zMz += zM[k] * zeta(k);
  }
  f.psi = (trace - zMz / zz) / static_cast<double>(n - 1);
  for (int k = 0; k < n; ++k) f.alpha(k) = (zM[k] - f.psi * zeta(k)) / zz;

  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double e = M(i, k).value() - f.alpha(k).value() * zeta(i).value() -
                       (i == k ? f.psi.value() : 0.0);
      f.residual = std::max(f.residual, std::abs(e));
    }
  return f;
}

std::vector<double> vec(const JetTensor& t) {
  std::vector<double> v;
  for (const auto& c : t.data()) v.push_back(c.value());
  return v;
}

struct PointJets {
  JetTensor zeta, alpha, mu, A, omega;
  MultiDual psi;  // the psi used for mu: closed form when declared
  ConcircularPoint point;
};

PointJets analyze(const LocalGeometry& geo, const CandidateField& cand) {
  const int n = geo.dimension();
  PointJets pj;
  auto& pt = pj.point;
  pt.at = geo.at();
  pj.zeta = zeta_jets(geo, cand);
  pt.zeta = vec(pj.zeta);

  const Fit c = fit(geo, pj.zeta, ConnectionKind::kCartan);
  const Fit b = fit(geo, pj.zeta, ConnectionKind::kBerwald);
  pt.determinate = c.determinate && b.determinate;
  pt.residual_h = c.residual;
  pt.scale_h = c.scale;
  pt.residual_v = c.residual_v;
  pt.residual_h_berwald = b.residual;
  pt.residual_v_berwald = b.residual_v;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      pt.y_derivative = std::max(pt.y_derivative, std::abs(geo.dot(pj.zeta(i), j).value()));

  pj.alpha = c.determinate ? c.alpha : JetTensor(n, {kDown});
  pt.alpha = vec(pj.alpha);
  pt.psi = c.determinate ? c.psi.value() : 0.0;
  pt.alpha_berwald = b.determinate ? vec(b.alpha) : std::vector<double>(n, 0.0);
  pt.psi_berwald = b.determinate ? b.psi.value() : 0.0;

  pj.psi = c.determinate ? c.psi : MultiDual(0.0);
  if (cand.psi) {
    pj.psi = cand.psi->evaluate<MultiDual>(geo.variables());
    pt.psi_closed_form = pj.psi.value();
  }
  pj.mu = JetTensor(n, {kDown});
  pj.A = JetTensor(n, {kDown});
  for (int k = 0; k < n; ++k) {
    pj.mu(k) = geo.delta(pj.psi, k);
    pj.A(k) = pj.mu(k) - pj.psi * pj.alpha(k);
  }
  pt.mu = vec(pj.mu);
  pt.A_form = vec(pj.A);
  pt.grad_A = geo.order() >= 5 ? values(geo.h_derivative(pj.A)) : Tensor<double>(n, {kDown, kDown});

  pj.omega = JetTensor(n, {kDown});
  for (int i = 0; i < n; ++i) {
    MultiDual s(0.0);
    for (int j = 0; j < n; ++j) s += geo.g()(i, j) * pj.zeta(j);
    pj.omega(i) = s;
  }
  pt.omega = vec(pj.omega);
  const auto& y = geo.at().y;
  const double l2 = geo.metric().energy.value();
  for (int i = 0; i < n; ++i) pt.B += pt.omega[i] * y[i];
  pt.m_field.resize(n);
  for (int i = 0; i < n; ++i) pt.m_field[i] = pt.zeta[i] - pt.B / l2 * y[i];
  // hbar(zeta, zeta) = g(zeta, zeta) - B^2 / L^2
  double gzz = 0.0, oo = 0.0, Ao = 0.0;
  for (int i = 0; i < n; ++i) {
    gzz += pt.omega[i] * pt.zeta[i];
    oo += pt.omega[i] * pt.omega[i];
    Ao += pt.A_form[i] * pt.omega[i];
  }
  pt.hbar_zeta_zeta = gzz - pt.B * pt.B / l2;
  if (oo > 1e-24) pt.lambda = Ao / oo;
  return pj;
}

// Running max of |lhs - rhs| and of max(|lhs|, |rhs|).
struct Acc {
  double residual = 0.0;
  double scale = 0.0;
  void add(double lhs, double rhs) {
    residual = std::max(residual, std::abs(lhs - rhs));
    scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
  }
  void merge(const Acc& o) {
    residual = std::max(residual, o.residual);
    scale = std::max(scale, o.scale);
  }
};

enum class ItemKind { kIdentity, kConcurrent, kClosedForm, kNonzero };

struct ItemSpec {
  const char* name;
  ItemKind kind;
};

const std::vector<ItemSpec>& item_specs() {
  static const std::vector<ItemSpec> specs{
      {"S(X,Y)zeta = 0", ItemKind::kIdentity},
      {"S(X,Y,Z,zeta) = 0", ItemKind::kIdentity},
      {"(nabla_{gamma Z} S)(X,Y,zeta) = 0", ItemKind::kIdentity},
      {"(nabla_{beta Z} S)(X,Y,zeta) = -psi S(X,Y)Z", ItemKind::kIdentity},
      {"(nabla_{beta zeta} S)(X,Y,zeta) = 0", ItemKind::kIdentity},
      {"P(X,Y)zeta = psi T(X,Y)", ItemKind::kIdentity},
      {"P(X,Y,Z,zeta) = -psi T(X,Y,Z)", ItemKind::kIdentity},
      {"(nabla_{gamma Z} P)(X,Y,zeta) = psi (nabla_{gamma Z} T)(X,Y)", ItemKind::kIdentity},
      {"(nabla_{beta Z} P)(X,Y,zeta) = A(Z) T(X,Y) + psi (nabla_{beta Z} T)(X,Y) - psi P(X,Y)Z",
       ItemKind::kIdentity},
      {"(nabla_{beta zeta} P)(X,Y,zeta) = (A(zeta) - psi^2) T(X,Y) + psi (nabla_{beta zeta} T)(X,Y)",
       ItemKind::kIdentity},
      {"R(X,Y)zeta = A(Y)X - A(X)Y", ItemKind::kIdentity},
      {"R(X,Y,Z,zeta) = A(X)g(Y,Z) - A(Y)g(X,Z)", ItemKind::kIdentity},
      {"(nabla_{gamma Z} R)(X,Y,zeta) = (mu - alpha)(T(Z,Y))X - (mu - alpha)(T(Z,X))Y",
       ItemKind::kIdentity},
      {"(nabla_{beta Z} R)(X,Y,zeta) in terms of nabla mu, nabla alpha, R", ItemKind::kIdentity},
      {"(nabla_{beta zeta} R)(X,Y,zeta) in terms of nabla mu, nabla alpha", ItemKind::kIdentity},
      {"concurrent: (nabla_{beta Z} S)(X,Y,zeta) = S(X,Y)Z", ItemKind::kConcurrent},
      {"concurrent: P(X,Y)zeta = -T(Y,X)", ItemKind::kConcurrent},
      {"concurrent: P(X,Y,Z,zeta) = T(X,Y,Z)", ItemKind::kConcurrent},
      {"concurrent: (nabla_{gamma Z} P)(X,Y,zeta) = -(nabla_{gamma Z} T)(Y,X)", ItemKind::kConcurrent},
      {"concurrent: (nabla_{beta Z} P)(X,Y,zeta) = -(nabla_{beta Z} T)(Y,X) + P(X,Y)Z",
       ItemKind::kConcurrent},
      {"concurrent: (nabla_{beta zeta} P)(X,Y,zeta) = -(nabla_{beta zeta} T)(Y,X) - T(Y,X)",
       ItemKind::kConcurrent},
      {"concurrent: R(X,Y)zeta = 0", ItemKind::kConcurrent},
      {"concurrent: (nabla_{gamma Z} R)(X,Y,zeta) = 0", ItemKind::kConcurrent},
      {"concurrent: (nabla_{beta Z} R)(X,Y,zeta) = R(X,Y)Z", ItemKind::kConcurrent},
      {"concurrent: (nabla_{beta zeta} R)(X,Y,zeta) = 0", ItemKind::kConcurrent},
      {"T(X,zeta) = T(zeta,X) = 0", ItemKind::kIdentity},
      {"Phat(X,zeta) = Phat(zeta,X) = 0", ItemKind::kIdentity},
      {"P(X,zeta)Y = P(zeta,X)Y = 0", ItemKind::kIdentity},
      {"A(Y)omega(X) - A(X)omega(Y) = 0", ItemKind::kIdentity},
      {"mu(T(X,Y)) = psi alpha(T(X,Y))", ItemKind::kIdentity},
      {"(nabla_{beta X} omega)(Y) = alpha(X)omega(Y) + psi g(X,Y)", ItemKind::kIdentity},
      {"(nabla_{gamma X} omega)(Y) = 0", ItemKind::kIdentity},
      {"psi independent of y", ItemKind::kIdentity},
      {"alpha independent of y", ItemKind::kIdentity},
      {"mu independent of y", ItemKind::kIdentity},
      {"zeta independent of y", ItemKind::kIdentity},
      {"omega independent of y", ItemKind::kIdentity},
      {"Berwald fit agrees with Cartan fit", ItemKind::kIdentity},
      {"zeta concircular for the Berwald connection", ItemKind::kIdentity},
      {"closed-form psi matches fitted psi", ItemKind::kClosedForm},
      {"zeta not identically zero", ItemKind::kNonzero},
      {"B = g(zeta,eta) not identically zero", ItemKind::kNonzero},
      {"m not identically zero", ItemKind::kNonzero},
      {"g(m,eta) = 0", ItemKind::kIdentity},
      {"g(m,zeta) = g(m,m)", ItemKind::kIdentity},
      {"hbar(zeta,zeta) not identically zero", ItemKind::kNonzero},
  };
  return specs;
}

// One Acc per item_specs() entry. kNonzero entries carry max |quantity| in
// `scale` and leave `residual` unused.
std::vector<Acc> consequence_point(const LocalGeometry& geo, const PointJets& pj) {
  const int n = geo.dimension();
  const auto& pt = pj.point;
  const CurvatureJets k(geo);
  const auto g = values(geo.g());
  const auto R = values(k.R), P = values(k.P), S = values(k.S);
  const auto T = values(k.torsion);
  const auto Tl = lower_last(T, g);
  const auto Pl = lower_last(P, g), Rl = lower_last(R, g), Sl = lower_last(S, g);
  const auto Phat = values(k.Phat);
  const auto hS = values(geo.h_derivative(k.S)), vS = values(geo.v_derivative(k.S));
  const auto hP = values(geo.h_derivative(k.P)), vP = values(geo.v_derivative(k.P));
  const auto hR = values(geo.h_derivative(k.R)), vR = values(geo.v_derivative(k.R));
  const auto hT = values(geo.h_derivative(k.torsion)), vT = values(geo.v_derivative(k.torsion));
  const auto gmu = values(geo.h_derivative(pj.mu)), galpha = values(geo.h_derivative(pj.alpha));
  const auto homega = values(geo.h_derivative(pj.omega)), vomega = values(geo.v_derivative(pj.omega));
  const auto& z = pt.zeta;
  const auto& al = pt.alpha;
  const auto& mu = pt.mu;
  const auto& A = pt.A_form;
  const double psi = pj.psi.value();
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  auto zc = [&](const Tensor<double>& t, int slot) {
    return contract(t, slot, std::span<const double>(z));
  };

  std::vector<Acc> acc(item_specs().size());
  std::size_t item = 0;

  // v-curvature
  const auto Sz = zc(S, 2);
  const auto hSz = zc(hS, 2);
  const auto vSz = zc(vS, 2);
  const auto hSzz = zc(hSz, 3);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i) {
        acc[0].add(Sz(a, b, i), 0.0);
        double s = 0.0;
        for (int w = 0; w < n; ++w) s += Sl(a, b, i, w) * z[w];
        acc[1].add(s, 0.0);
        acc[4].add(hSzz(a, b, i), 0.0);
        for (int c = 0; c < n; ++c) {
          acc[2].add(vSz(a, b, i, c), 0.0);
          acc[3].add(hSz(a, b, i, c), -psi * S(a, b, c, i));
        }
      }
  item = 5;

  // hv-curvature
  const auto Pz = zc(P, 2);
  const auto vPz = zc(vP, 2);
  const auto hPz = zc(hP, 2);
  const auto hPzz = zc(hPz, 3);
  const auto hTz = zc(hT, 3);
  double Az = 0.0;
  for (int m = 0; m < n; ++m) Az += A[m] * z[m];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i) {
        acc[item + 0].add(Pz(a, b, i), psi * T(a, b, i));
        double s = 0.0;
        for (int w = 0; w < n; ++w) s += Pl(a, b, i, w) * z[w];
        acc[item + 1].add(s, -psi * Tl(a, b, i));
        for (int c = 0; c < n; ++c) {
          acc[item + 2].add(vPz(a, b, i, c), psi * vT(a, b, i, c));
          acc[item + 3].add(hPz(a, b, i, c),
                            A[c] * T(a, b, i) + psi * hT(a, b, i, c) - psi * P(a, b, c, i));
        }
        acc[item + 4].add(hPzz(a, b, i), (Az - psi * psi) * T(a, b, i) + psi * hTz(a, b, i));
      }
  item += 5;

  // h-curvature
  const auto Rz = zc(R, 2);
  const auto vRz = zc(vR, 2);
  const auto hRz = zc(hR, 2);
  const auto hRzz = zc(hRz, 3);
  // K(z, y) = (mu - alpha)(T(e_z, e_y))
  Tensor<double> K(n, {kDown, kDown});
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b)
      for (int m = 0; m < n; ++m) K(c, b) += (mu[m] - al[m]) * T(c, b, m);
  // Q(z, y): coefficient in the expansion of (nabla_{beta Z} R)(X,Y,zeta)
  Tensor<double> Q(n, {kDown, kDown});
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b)
      Q(c, b) = gmu(b, c) - psi * galpha(b, c) + psi * al[c] * al[b] - (mu[c] * al[b] + al[c] * mu[b]);
  double muz = 0.0, alz = 0.0;
  for (int m = 0; m < n; ++m) {
    muz += mu[m] * z[m];
    alz += al[m] * z[m];
  }
  std::vector<double> Qm(n, 0.0);
  for (int b = 0; b < n; ++b) {
    double gm = 0.0, ga = 0.0;
    for (int c = 0; c < n; ++c) {
      gm += gmu(b, c) * z[c];
      ga += galpha(b, c) * z[c];
    }
    Qm[b] = gm - psi * ga - (muz * al[b] + alz * mu[b]) + psi * alz * al[b] - psi * mu[b] +
            psi * psi * al[b];
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i) {
        acc[item + 0].add(Rz(a, b, i), A[b] * d(i, a) - A[a] * d(i, b));
        double s = 0.0;
        for (int w = 0; w < n; ++w) s += Rl(a, b, i, w) * z[w];
        acc[item + 1].add(s, A[a] * g(b, i) - A[b] * g(a, i));
        for (int c = 0; c < n; ++c) {
          acc[item + 2].add(vRz(a, b, i, c), K(c, b) * d(i, a) - K(c, a) * d(i, b));
          acc[item + 3].add(hRz(a, b, i, c), Q(c, b) * d(i, a) - Q(c, a) * d(i, b) - psi * R(a, b, c, i));
        }
        acc[item + 4].add(hRzz(a, b, i), Qm[b] * d(i, a) - Qm[a] * d(i, b));
      }
  item += 5;

  // concurrent specializations: psi = -1, alpha = 0
  const auto vTz = vT;  // (a, b, i, c)
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i) {
        acc[item + 1].add(Pz(a, b, i), -T(b, a, i));
        double s = 0.0;
        for (int w = 0; w < n; ++w) s += Pl(a, b, i, w) * z[w];
        acc[item + 2].add(s, Tl(a, b, i));
        acc[item + 5].add(hPzz(a, b, i), -hTz(b, a, i) - T(b, a, i));
        acc[item + 6].add(Rz(a, b, i), 0.0);
        acc[item + 9].add(hRzz(a, b, i), 0.0);
        for (int c = 0; c < n; ++c) {
          acc[item + 0].add(hSz(a, b, i, c), S(a, b, c, i));
          acc[item + 3].add(vPz(a, b, i, c), -vTz(b, a, i, c));
          acc[item + 4].add(hPz(a, b, i, c), -hT(b, a, i, c) + P(a, b, c, i));
          acc[item + 7].add(vRz(a, b, i, c), 0.0);
          acc[item + 8].add(hRz(a, b, i, c), R(a, b, c, i));
        }
      }
  item += 10;

  // torsion, Phat, P along zeta
  const auto Tz1 = zc(T, 1), Tz0 = zc(T, 0);
  const auto Ph1 = zc(Phat, 1), Ph0 = zc(Phat, 0);
  const auto Pz1 = zc(P, 1), Pz0 = zc(P, 0);
  for (std::size_t f = 0; f < Tz1.size(); ++f) {
    acc[item + 0].add(Tz1[f], 0.0);
    acc[item + 0].add(Tz0[f], 0.0);
    acc[item + 1].add(Ph1[f], 0.0);
    acc[item + 1].add(Ph0[f], 0.0);
  }
  for (std::size_t f = 0; f < Pz1.size(); ++f) {
    acc[item + 2].add(Pz1[f], 0.0);
    acc[item + 2].add(Pz0[f], 0.0);
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      acc[item + 3].add(A[b] * pt.omega[a], A[a] * pt.omega[b]);
      double muT = 0.0, alT = 0.0;
      for (int m = 0; m < n; ++m) {
        muT += mu[m] * T(a, b, m);
        alT += al[m] * T(a, b, m);
      }
      acc[item + 4].add(muT, psi * alT);
      // omega derivatives, slot order (Y, X)
      acc[item + 5].add(homega(b, a), al[a] * pt.omega[b] + psi * g(a, b));
      acc[item + 6].add(vomega(b, a), 0.0);
    }
  item += 7;

  // y-independence
  for (int k2 = 0; k2 < n; ++k2) {
    acc[item + 0].add(geo.dot(pj.psi, k2).value(), 0.0);
    for (int i = 0; i < n; ++i) {
      acc[item + 1].add(geo.dot(pj.alpha(i), k2).value(), 0.0);
      acc[item + 2].add(geo.dot(pj.mu(i), k2).value(), 0.0);
      acc[item + 3].add(geo.dot(pj.zeta(i), k2).value(), 0.0);
      acc[item + 4].add(geo.dot(pj.omega(i), k2).value(), 0.0);
    }
  }
  item += 5;

  // Berwald side
  acc[item].add(pt.psi_berwald, pt.psi);
  for (int i = 0; i < n; ++i) acc[item].add(pt.alpha_berwald[i], al[i]);
  acc[item + 1].add(std::max(pt.residual_h_berwald, pt.residual_v_berwald), 0.0);
  acc[item + 1].scale = std::max(acc[item + 1].scale, pt.scale_h);
  item += 2;

  if (pt.psi_closed_form) acc[item].add(*pt.psi_closed_form, pt.psi);
  item += 1;

  // non-vanishing and orthogonality
  double zmax = 0.0, mmax = 0.0, gmeta = 0.0, gmz = 0.0, gmm = 0.0;
  for (int i = 0; i < n; ++i) {
    zmax = std::max(zmax, std::abs(z[i]));
    mmax = std::max(mmax, std::abs(pt.m_field[i]));
    for (int j = 0; j < n; ++j) {
      gmeta += g(i, j) * pt.m_field[i] * geo.at().y[j];
      gmz += g(i, j) * pt.m_field[i] * z[j];
      gmm += g(i, j) * pt.m_field[i] * pt.m_field[j];
    }
  }
  acc[item + 0].scale = zmax;
  acc[item + 1].scale = std::abs(pt.B);
  acc[item + 2].scale = mmax;
  acc[item + 3].add(gmeta, 0.0);
  acc[item + 4].add(gmz, gmm);
  acc[item + 5].scale = std::abs(pt.hbar_zeta_zeta);
  return acc;
}

}  // namespace

ConcircularPoint analyze_point(const LocalGeometry& geo, const CandidateField& cand) {
  return analyze(geo, cand).point;
}

std::string ConcircularReport::verdict() const {
  if (indeterminate) return "indeterminate";
  if (concurrent) return "concurrent";
  if (concircular) return "concircular";
  return "not concircular";
}

ConcircularReport fit_and_verify(const MetricModel& m, const CandidateField& cand,
                                 const std::vector<JetPoint>& corpus,
                                 const ConcircularOptions& options) {
  if (corpus.empty()) throw std::invalid_argument("fit_and_verify: empty corpus");
  ConcircularReport r;
  r.candidate = cand.name;
  r.metric = m.name();
  r.points = static_cast<int>(corpus.size());
  r.tol = options.tol;
  r.psi_min = options.psi_min;
  r.min_abs_psi = std::numeric_limits<double>::infinity();
  double min_abs_psi_b = std::numeric_limits<double>::infinity();
  for (const auto& p : corpus) {
    LocalGeometry geo(m, p, {.order = options.order, .connection_fault = options.connection_fault});
    auto pt = analyze(geo, cand).point;
    if (!pt.determinate) ++r.indeterminate_points;
    r.residual_h = std::max(r.residual_h, pt.residual_h);
    r.scale_h = std::max(r.scale_h, pt.scale_h);
    r.residual_v = std::max(r.residual_v, pt.residual_v);
    r.residual_h_berwald = std::max(r.residual_h_berwald, pt.residual_h_berwald);
    r.residual_v_berwald = std::max(r.residual_v_berwald, pt.residual_v_berwald);
    r.min_abs_psi = std::min(r.min_abs_psi, std::abs(pt.psi));
    min_abs_psi_b = std::min(min_abs_psi_b, std::abs(pt.psi_berwald));
    r.max_abs_psi_plus_one = std::max(r.max_abs_psi_plus_one, std::abs(pt.psi + 1.0));
    for (double a : pt.alpha) r.max_abs_alpha = std::max(r.max_abs_alpha, std::abs(a));
    if (pt.psi_closed_form)
      r.closed_form_psi_residual =
          std::max(r.closed_form_psi_residual, std::abs(*pt.psi_closed_form - pt.psi));
    r.declared_y_independence = std::max(r.declared_y_independence, pt.y_derivative);
    r.data.push_back(std::move(pt));
  }
  r.indeterminate = r.indeterminate_points > 0;
  r.concircular = r.concircular_under(options.tol);
  r.concurrent = r.concurrent_under(options.tol);
  r.berwald_concircular = !r.indeterminate &&
                          options.tol.holds(r.residual_h_berwald, r.scale_h) &&
                          options.tol.holds(r.residual_v_berwald, r.scale_h) &&
                          min_abs_psi_b > options.psi_min;
  return r;
}

bool ConcircularReport::concircular_under(const Tolerance& t) const {
  return !indeterminate && t.holds(residual_h, scale_h) && t.holds(residual_v, scale_h) &&
         min_abs_psi > psi_min;
}

bool ConcircularReport::concurrent_under(const Tolerance& t) const {
  return concircular_under(t) && t.holds(max_abs_psi_plus_one, 1.0) && t.holds(max_abs_alpha, 1.0);
}

const ConsequenceItem& ConsequenceReport::find(const std::string& name) const {
  for (const auto& i : items)
    if (i.name == name) return i;
  throw std::out_of_range("consequence battery has no item '" + name + "'");
}

ConsequenceReport consequence_battery(const MetricModel& m, const CandidateField& cand,
                                      const std::vector<JetPoint>& corpus,
                                      const ConcircularOptions& options) {
  return consequence_battery(m, cand, corpus, fit_and_verify(m, cand, corpus, options), options);
}

ConsequenceReport consequence_battery(const MetricModel& m, const CandidateField& cand,
                                      const std::vector<JetPoint>& corpus,
                                      const ConcircularReport& fit,
                                      const ConcircularOptions& options) {
  ConsequenceReport r;
  r.candidate = cand.name;
  r.metric = m.name();
  if (!fit.concircular) return r;
  r.ran = true;
  const int order = std::max(options.order, 5);
  const auto& specs = item_specs();
  std::vector<Acc> total(specs.size());
  for (const auto& p : corpus) {
    LocalGeometry geo(m, p, {.order = order, .connection_fault = options.connection_fault});
    const auto pj = analyze(geo, cand);
    const auto acc = consequence_point(geo, pj);
    for (std::size_t k = 0; k < acc.size(); ++k) total[k].merge(acc[k]);
  }
  const auto& tol = options.tol;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    ConsequenceItem item;
    item.name = specs[k].name;
    item.residual = total[k].residual;
    item.scale = total[k].scale;
    item.bound = tol.bound(item.scale);
    switch (specs[k].kind) {
      case ItemKind::kConcurrent:
        item.applicable = fit.concurrent;
        break;
      case ItemKind::kClosedForm:
        item.applicable = static_cast<bool>(cand.psi);
        break;
      case ItemKind::kNonzero:
        // max |quantity| over the corpus must clear the absolute floor
        item.residual = total[k].scale;
        item.bound = tol.bound(0.0);
        item.holds = item.residual > item.bound;
        r.items.push_back(std::move(item));
        continue;
      case ItemKind::kIdentity:
        break;
    }
    item.holds = tol.holds(item.residual, item.scale);
    r.items.push_back(std::move(item));
  }
  return r;
}

}  // namespace finsler
