#pragma once

// YAML run configuration for finsler-lab.
//
//   sampling:   {points: 50, seed: 1, box: [[-0.5, 0.5], ...]}
//   tolerances: {tol_abs: 1e-8, tol_rel: 1e-7, psi_min: 1e-6}
//   metrics:
//     - {name: s3, family: riemannian, n: 3, a: [[...], ...], params: {k: 1}}
//     - {name: r3, family: randers, n: 3, a: identity, b: ["0.3", 0, 0]}
//     - {name: e3, family: euclidean, n: 3}
//     - {name: f2, family: expression, n: 2, L: "sqrt(y1^2 + y2^2)"}
//   candidates:
//     - {name: radial, metrics: [e3], components: ["-x1", "-x2", "-x3"],
//        psi: "-1", y_independent: true, expect: concurrent}
//   tasks: [tensors, classify, concircular, verify-theorems, identity-battery]

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <finsler/classify.hpp>

namespace finsler::lab {

/// Malformed or inconsistent configuration; carries a source location when
/// one is known (1-based line and column).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

enum class Task { kTensors, kClassify, kConcircular, kVerifyTheorems, kIdentityBattery };
std::string to_string(Task t);
const std::vector<Task>& all_tasks();

struct CandidateSpec {
  CandidateField field;
  std::vector<std::string> metrics;  // empty: every metric of matching dimension
  std::optional<std::vector<Expression>> A_tensor;
  std::optional<std::string> expect;  // a ConcircularReport::verdict() value
};

struct RunConfig {
  int points = 50;
  std::uint64_t seed = 1;
  Tolerance tol;
  double psi_min = 1e-6;
  std::vector<MetricModel> metrics;
  std::vector<CandidateSpec> candidates;
  std::vector<Task> tasks;
  /// FNV-1a of the configuration text.
  std::uint64_t hash = 0;

  const MetricModel& metric(const std::string& name) const;
  /// Metrics a candidate applies to, in declaration order.
  std::vector<const MetricModel*> metrics_for(const CandidateSpec& c) const;
  bool has(Task t) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& text);

}  // namespace finsler::lab
