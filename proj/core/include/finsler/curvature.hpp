#pragma once

// Curvature of the Cartan connection.
//
// Array layout: mixed curvature arrays are indexed (a, b, c, i) with
//   K(e_a, e_b) e_c = K(a, b, c, i) e_i,
// for K in {R, P, S}: R = K(beta X, beta Y), P = K(beta X, gamma Y),
// S = K(gamma X, gamma Y). The curvature operator is taken with the sign
//   K(U, V) = -[nabla_U, nabla_V] + nabla_[U, V],
// under which the unit sphere has k0 = +1. Lowered arrays are
//   K(a, b, c, w) = K(a, b, c, i) g_iw.
// The hatted tensors are Khat(a, b, i) = K(a, b, c, i) y^c, and the torsion
// T(e_a, e_b) = T(a, b, i) e_i with T(a, b, i) = C^i_ab.

#include <string>
#include <vector>

#include "finsler/connection.hpp"
#include "finsler/tolerance.hpp"

namespace finsler {

/// Curvature jets at one point. Needs a LocalGeometry of order >= 4; one
/// more order gives one more layer of covariant derivatives.
struct CurvatureJets {
  JetTensor torsion;  // (Down, Down, Up)
  JetTensor R, P, S;  // (Down, Down, Down, Up)
  JetTensor Rhat, Phat, Shat;  // (Down, Down, Up)

  explicit CurvatureJets(const LocalGeometry& geo);
};

/// Lowers the last (contravariant) slot of a jet tensor with g.
JetTensor lower_last(const JetTensor& t, const JetTensor& g);
Tensor<double> lower_last(const Tensor<double>& t, const Tensor<double>& g);

/// Contracts the given slot of `t` with the vector v (slot removed).
JetTensor contract(const JetTensor& t, int slot, std::span<const MultiDual> v);
Tensor<double> contract(const Tensor<double>& t, int slot, std::span<const double> v);

struct CurvatureData {
  Tensor<double> R, P, S;              // lowered (a, b, c, w)
  Tensor<double> R_mixed, P_mixed, S_mixed;  // (a, b, c, i)
  Tensor<double> Rhat, Phat, Shat;     // (a, b, i)
  Tensor<double> ric_v;                // Ric^v(a, c) = S(a, b, c, b)
  double sc_v = 0.0;                   // g^ac Ric^v(a, c)
  JetPoint at;
};

CurvatureData curvature_data(const LocalGeometry& geo, const CurvatureJets& k);
CurvatureData curvatures(const MetricModel& m, const JetPoint& p);

struct IdentityResult {
  std::string name;
  double residual = 0.0;
  double scale = 0.0;
  double bound = 0.0;
  bool holds = true;
};

struct IdentityBatteryReport {
  std::vector<IdentityResult> identities;
  int points = 0;
  bool passed() const {
    for (const auto& r : identities)
      if (!r.holds) return false;
    return true;
  }
  const IdentityResult& find(const std::string& name) const;
};

/// Per-point residuals of the unconditional curvature identities, in the
/// order of identity_names(). Each entry is (residual, scale).
std::vector<std::pair<double, double>> identity_residuals(const LocalGeometry& geo);
const std::vector<std::string>& identity_names();

/// Maximum residual of each identity over the corpus. `options.order` is
/// raised to 5 when lower.
IdentityBatteryReport identity_battery(const MetricModel& m, const std::vector<JetPoint>& corpus,
                                       const Tolerance& tol = {}, GeometryOptions options = {});

}  // namespace finsler
