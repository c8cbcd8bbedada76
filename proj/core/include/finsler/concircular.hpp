#pragma once

// Candidate pi-vector fields zeta and the concircular condition
//   nabla_{beta X} zeta = alpha(X) zeta + psi X,   nabla_{gamma X} zeta = 0.
// alpha and psi are fitted per point by least squares; mu = d psi(beta .) is
// the horizontal derivative of the fitted (or closed-form) psi jet.

#include <optional>
#include <string>
#include <vector>

#include "finsler/curvature.hpp"
#include "finsler/tolerance.hpp"

namespace finsler {

struct CandidateField {
  std::string name;
  std::vector<Expression> components;  // zeta^i(x, y)
  bool declared_y_independent = false;
  /// Optional closed form of psi(x); when present mu is derived from it.
  std::optional<Expression> psi;

  int dimension() const { return components.empty() ? 0 : components.front().dimension(); }
};

struct ConcircularOptions {
  Tolerance tol;
  double psi_min = 1e-6;
  /// Truncation order of L^2. 5 gives one derivative of curvature and of mu.
  int order = 5;
  double connection_fault = 0.0;
};

/// Everything derived from a candidate at one sample point.
struct ConcircularPoint {
  JetPoint at;
  bool determinate = true;
  std::vector<double> zeta;
  std::vector<double> alpha;   // fitted alpha_k
  double psi = 0.0;            // fitted psi
  std::optional<double> psi_closed_form;
  std::vector<double> mu;      // mu_k = delta_k psi
  std::vector<double> A_form;  // mu - psi alpha
  std::vector<double> omega;   // g_ij zeta^j
  double B = 0.0;              // g(zeta, eta)
  std::vector<double> m_field; // zeta - (B / L^2) eta
  double hbar_zeta_zeta = 0.0;
  std::optional<double> lambda;  // A = lambda omega, when omega != 0
  Tensor<double> grad_A;       // (x, z): (nabla_{beta e_z} A)(e_x)

  double residual_h = 0.0;  // defect of the (alpha, psi) fit
  double scale_h = 0.0;     // max |h nabla zeta|
  double residual_v = 0.0;  // max |v nabla zeta|
  double y_derivative = 0.0;  // max |d zeta / dy|

  std::vector<double> alpha_berwald;
  double psi_berwald = 0.0;
  double residual_h_berwald = 0.0;
  double residual_v_berwald = 0.0;
};

struct ConcircularReport {
  std::string candidate;
  std::string metric;
  int points = 0;
  int indeterminate_points = 0;
  double residual_h = 0.0;
  double scale_h = 0.0;
  double residual_v = 0.0;
  double min_abs_psi = 0.0;
  double max_abs_psi_plus_one = 0.0;
  double max_abs_alpha = 0.0;
  double closed_form_psi_residual = 0.0;  // max |psi_closed - psi_fit|
  double declared_y_independence = 0.0;   // max |d zeta / dy|
  double residual_h_berwald = 0.0;
  double residual_v_berwald = 0.0;
  Tolerance tol;
  double psi_min = 0.0;

  bool indeterminate = false;
  bool concircular = false;
  bool concurrent = false;
  bool berwald_concircular = false;

  std::vector<ConcircularPoint> data;

  std::string verdict() const;
  /// The verdicts recomputed under another tolerance.
  bool concircular_under(const Tolerance& t) const;
  bool concurrent_under(const Tolerance& t) const;
};

/// Fits (alpha, psi) at each corpus point and checks the concircular
/// conditions with respect to both the Cartan and Berwald connections.
ConcircularReport fit_and_verify(const MetricModel& m, const CandidateField& cand,
                                 const std::vector<JetPoint>& corpus,
                                 const ConcircularOptions& options = {});

/// Per-point analysis on a prepared geometry (order >= 4).
ConcircularPoint analyze_point(const LocalGeometry& geo, const CandidateField& cand);

struct ConsequenceItem {
  std::string name;
  double residual = 0.0;
  double scale = 0.0;
  double bound = 0.0;
  bool applicable = true;
  bool holds = true;
};

struct ConsequenceReport {
  std::string candidate;
  std::string metric;
  bool ran = false;  // false when the candidate is not concircular
  std::vector<ConsequenceItem> items;
  bool passed() const {
    for (const auto& i : items)
      if (i.applicable && !i.holds) return false;
    return true;
  }
  const ConsequenceItem& find(const std::string& name) const;
};

/// Residuals of the consequences of concircularity. Items specific to the
/// concurrent case are marked not applicable for non-concurrent fields.
ConsequenceReport consequence_battery(const MetricModel& m, const CandidateField& cand,
                                      const std::vector<JetPoint>& corpus,
                                      const ConcircularOptions& options = {});
ConsequenceReport consequence_battery(const MetricModel& m, const CandidateField& cand,
                                      const std::vector<JetPoint>& corpus,
                                      const ConcircularReport& fit,
                                      const ConcircularOptions& options = {});

}  // namespace finsler
