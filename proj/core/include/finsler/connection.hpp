#pragma once

// Geodesic spray, nonlinear connection, and the Cartan and Berwald
// connections in natural coordinates (x^i, y^i) of TM.
//
// Conventions (all index positions as stored in the arrays):
//   G^i            spray, G^i = 1/4 g^il (d2(L^2)/dy^l dx^k y^k - d(L^2)/dx^l)
//   N(i, j)        N^i_j = dG^i/dy^j
//   delta_k        d/dx^k - N^m_k d/dy^m, the horizontal frame
//   F(i, j, k)     Cartan: nabla_{delta_k} e_j = F^i_jk e_i
//   C(i, j, k)     Cartan: nabla_{d/dy^k} e_j = C^i_jk e_i, C^i_jk = g^il T_ljk
//   B(i, j, k)     Berwald: D_{delta_k} e_j = G^i_jk e_i, G^i_jk = dN^i_j/dy^k;
//                  D_{d/dy^k} e_j = 0
// Covariant derivatives append the derivative direction as the last
// (covariant) slot.

#include <functional>
#include <vector>

#include "finsler/metric.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

enum class ConnectionKind { kCartan, kBerwald };

struct GeometryOptions {
  /// Truncation order of L^2. Connection coefficients carry order-3,
  /// curvature order-4, derivatives of curvature order-5.
  int order = 4;
  /// Test hook: adds this multiple of a fixed symmetric pattern to F^i_jk.
  double connection_fault = 0.0;
};

/// Jets of the connection data at one JetPoint. Immutable after construction.
class LocalGeometry {
 public:
  LocalGeometry(const MetricModel& m, const JetPoint& p, GeometryOptions options = {});

  int dimension() const noexcept { return metric_.n; }
  int order() const noexcept { return metric_.order; }
  const JetPoint& at() const noexcept { return metric_.at; }
  const MetricJets& metric() const noexcept { return metric_; }

  const JetTensor& g() const noexcept { return metric_.g; }
  const JetTensor& g_inv() const noexcept { return metric_.g_inv; }
  const JetTensor& cartan_tensor() const noexcept { return metric_.cartan; }

  const JetTensor& spray() const noexcept { return spray_; }
  const JetTensor& nonlinear() const noexcept { return nonlinear_; }
  const JetTensor& cartan_h() const noexcept { return cartan_h_; }
  const JetTensor& cartan_v() const noexcept { return cartan_v_; }
  const JetTensor& berwald() const noexcept { return berwald_; }

  /// Coordinate jets x^i, y^i.
  const MultiDual& x(int i) const { return metric_.x(i); }
  const MultiDual& y(int i) const { return metric_.y(i); }
  std::span<const MultiDual> variables() const { return metric_.vars; }

  /// The fundamental pi-vector field eta = y^i e_i.
  JetTensor eta() const;

  /// delta_k f and d f / dy^k.
  MultiDual delta(const MultiDual& f, int k) const;
  MultiDual dot(const MultiDual& f, int k) const { return f.derivative(dimension() + k); }

  /// Horizontal / vertical covariant derivative of a pi-tensor field with
  /// respect to the chosen connection.
  JetTensor h_derivative(const JetTensor& w, ConnectionKind kind = ConnectionKind::kCartan) const;
  JetTensor v_derivative(const JetTensor& w, ConnectionKind kind = ConnectionKind::kCartan) const;

 private:
  JetTensor covariant(const JetTensor& w, const JetTensor* gamma, bool horizontal) const;

  MetricJets metric_;
  JetTensor spray_;      // (Up)
  JetTensor nonlinear_;  // (Up, Down)
  JetTensor cartan_h_;   // (Up, Down, Down)
  JetTensor cartan_v_;   // (Up, Down, Down)
  JetTensor berwald_;    // (Up, Down, Down)
};

/// A pi-tensor field supplied as a builder over the local jets, so that its
/// own derivatives come from the jet arithmetic.
struct TensorField {
  std::vector<Variance> signature;
  std::function<JetTensor(const LocalGeometry&)> build;

  /// Components from expressions in (x, y), row-major over the signature.
  static TensorField from_expressions(int n, std::vector<Variance> signature,
                                      std::vector<Expression> components);
  /// The fundamental tensor g_ij.
  static TensorField metric_tensor();
  /// The Finsler function L as a scalar field.
  static TensorField finsler_function();
  /// eta = y^i e_i.
  static TensorField fundamental_vector();
};

struct SprayData {
  std::vector<double> spray;   // G^i
  Tensor<double> nonlinear;    // N^i_j
};

struct ConnectionData {
  std::vector<double> spray;   // G^i
  Tensor<double> nonlinear;    // N^i_j
  Tensor<double> cartan_h;     // F^i_jk
  Tensor<double> cartan_v;     // C^i_jk
  Tensor<double> berwald;      // G^i_jk
  JetPoint at;
};

SprayData spray_and_nonlinear(const MetricModel& m, const JetPoint& p);
ConnectionData cartan_coefficients(const MetricModel& m, const JetPoint& p);
ConnectionData connection_data(const LocalGeometry& geo);

PointTensor h_cov_derive(const MetricModel& m, const JetPoint& p, const TensorField& field,
                         ConnectionKind kind = ConnectionKind::kCartan);
PointTensor v_cov_derive(const MetricModel& m, const JetPoint& p, const TensorField& field,
                         ConnectionKind kind = ConnectionKind::kCartan);

/// Residuals of the Cartan axioms at one point.
struct CartanAxiomResiduals {
  double h_metricity = 0.0;   // delta_k g_ij - F^l_ik g_lj - F^l_jk g_il
  double v_metricity = 0.0;   // dg_ij/dy^k - 2 T_ijk
  double f_symmetry = 0.0;    // F^i_jk - F^i_kj
  double t_symmetry = 0.0;    // g(T(X,Y),Z) - g(T(X,Z),Y)
  double deflection = 0.0;    // F^i_jk y^j - N^i_k
};
CartanAxiomResiduals cartan_axioms(const LocalGeometry& geo);

/// Residuals of the Berwald axioms at one point.
struct BerwaldAxiomResiduals {
  double symmetry = 0.0;      // G^i_jk - G^i_kj
  double contraction = 0.0;   // G^i_jk y^k - N^i_j
  double h_derivative_of_l = 0.0;  // D_{delta_k} L
};
BerwaldAxiomResiduals berwald_axioms(const LocalGeometry& geo);

/// Residuals of the Berwald-Cartan relation applied to a vector field Y:
///   (a) D_{gamma X} Y - nabla_{gamma X} Y + T(X, Y)
///   (b) D_{beta X} Y - nabla_{beta X} Y - Phat(X, Y)
/// with Phat taken from the hv-curvature.
struct BridgeResidual {
  double vertical = 0.0;
  double horizontal = 0.0;
  double max() const { return std::max(vertical, horizontal); }
};
BridgeResidual berwald_bridge_check(const LocalGeometry& geo, const TensorField& field);
BridgeResidual berwald_bridge_check(const MetricModel& m, const JetPoint& p,
                                    const TensorField& field);

}  // namespace finsler
