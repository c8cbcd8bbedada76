#pragma once

// Special Finsler spaces as residual predicates, recurrence fitting, and the
// implication harness over (metric, candidate) pairs.

#include <optional>
#include <string>
#include <vector>

#include "finsler/concircular.hpp"

namespace finsler {

enum class Verdict { kPass, kFail, kVacuous, kNotApplicable };
std::string to_string(Verdict v);

struct PredicateResult {
  std::string name;
  double residual = 0.0;
  double scale = 0.0;
  double bound = 0.0;
  Verdict verdict = Verdict::kPass;
  std::string note;
  std::vector<std::pair<std::string, double>> fitted;

  /// Re-evaluates the verdict under another tolerance. Vacuous predicates
  /// hold, not-applicable ones do not.
  bool holds(const Tolerance& tol) const;
};

struct ClassifyOptions {
  Tolerance tol;
  /// C^2 below this counts as zero for the predicates that divide by it.
  double c2_min = 1e-10;
  /// Optional A_tensor (n*n expressions) for the quasi-C-reducible form.
  std::optional<std::vector<Expression>> A_tensor;
  int order = 5;
};

struct ClassificationReport {
  std::string metric;
  int dimension = 0;
  int points = 0;
  Tolerance tol;
  std::vector<PredicateResult> predicates;
  // Per-point fits used by the theorem harness.
  std::vector<double> k0;                 // h-isotropic scalar
  std::vector<std::vector<double>> phi;   // P2-like form
  double max_abs_T = 0.0;
  double max_abs_S = 0.0;
  double max_abs_R = 0.0;
  double max_abs_P = 0.0;

  const PredicateResult& find(const std::string& name) const;
};

ClassificationReport classify_special(const MetricModel& m, const std::vector<JetPoint>& corpus,
                                      const ClassifyOptions& options = {});

/// Result of matching a tensor against a defining form at one point.
struct FormFit {
  double residual = 0.0;
  double scale = 0.0;
  std::vector<double> coefficients;
};

/// (1/(n+1)) cyclic sum of hbar(X,Y) c(Z), lowered (i, j, k).
Tensor<double> c_reducible_form(const Tensor<double>& hbar, std::span<const double> c);
/// Fits c in T = (1/(n+1)) cyclic{hbar c}; coefficients = c.
FormFit fit_c_reducible(const Tensor<double>& T, const Tensor<double>& hbar);
/// Fits the scalar of the semi-C-reducible form; coefficients = {mu, tau}.
FormFit fit_semi_c_reducible(const Tensor<double>& T, const Tensor<double>& hbar,
                             std::span<const double> C, double c2);
/// Defect of T = C C C / C^2.
FormFit check_c2_like(const Tensor<double>& T, std::span<const double> C, double c2);
/// Defect of T = cyclic{A(X,Y) C(Z)} together with the symmetry of A and
/// A(., eta) = 0.
FormFit check_quasi_c_reducible(const Tensor<double>& T, const Tensor<double>& A,
                                std::span<const double> C, std::span<const double> y);

enum class TensorKind { kT, kS, kP, kR };
enum class Direction { kHorizontal, kVertical };
std::string recurrence_name(TensorKind kind, Direction direction);

struct RecurrenceResult {
  std::string name;  // e.g. "T^h"
  TensorKind kind = TensorKind::kT;
  Direction direction = Direction::kHorizontal;
  double residual = 0.0;
  double scale = 0.0;
  double bound = 0.0;
  double tensor_norm = 0.0;  // max |W| over the corpus
  bool zero_tensor = false;
  bool recurrent = false;
  std::vector<std::vector<double>> lambda;  // per point

  std::string verdict() const;
  bool holds(const Tolerance& tol) const;
};

RecurrenceResult fit_recurrence(const MetricModel& m, const std::vector<JetPoint>& corpus,
                                TensorKind kind, Direction direction, const Tolerance& tol = {},
                                int order = 5);

enum class InstanceStatus { kSatisfied, kViolated, kVacuous };
std::string to_string(InstanceStatus s);

struct HarnessInstance {
  std::string theorem;
  std::string metric;
  std::string candidate;
  InstanceStatus status = InstanceStatus::kVacuous;
  bool trivial = false;  // some hypothesis held only vacuously
  std::vector<std::pair<std::string, bool>> hypotheses;
  std::string conclusion;
  double conclusion_residual = 0.0;
  std::string note;
};

struct HarnessReport {
  std::vector<HarnessInstance> instances;
  int satisfied = 0;
  int satisfied_nontrivial = 0;
  int violated = 0;
  int vacuous = 0;
};

struct HarnessPair {
  const MetricModel* metric = nullptr;
  const std::vector<JetPoint>* corpus = nullptr;
  const CandidateField* candidate = nullptr;
  std::optional<std::vector<Expression>> A_tensor;
};

struct HarnessOptions {
  Tolerance tol;
  double psi_min = 1e-6;
  double c2_min = 1e-10;
  /// Hypotheses are tested with tol scaled by this factor.
  double hypothesis_factor = 0.1;
};

/// Inputs the harness reuses per metric and per pair; exposed so that a
/// caller that already ran the checks does not recompute them.
struct MetricEvidence {
  ClassificationReport classification;
  std::vector<RecurrenceResult> recurrence;  // T,S,P,R x h,v
  const RecurrenceResult& find(TensorKind k, Direction d) const;
};
MetricEvidence gather_evidence(const MetricModel& m, const std::vector<JetPoint>& corpus,
                               const ClassifyOptions& options);

std::vector<HarnessInstance> harness_instances(const MetricModel& m,
                                               const std::vector<JetPoint>& corpus,
                                               const CandidateField& cand,
                                               const ConcircularReport& fit,
                                               const MetricEvidence& evidence,
                                               const HarnessOptions& options,
                                               const std::optional<std::vector<Expression>>& A_tensor = {});

HarnessReport theorem_harness(const std::vector<HarnessPair>& pairs, const HarnessOptions& options = {});

}  // namespace finsler
