#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace finsler::lab {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

struct Overrides {
  std::optional<double> tol_abs;
  std::optional<double> tol_rel;
  std::optional<std::uint64_t> seed;
  std::optional<int> points;
};

void apply(RunConfig& c, const Overrides& o);

struct RunResult {
  nlohmann::ordered_json report;
  int exit_code = kExitPass;
  std::vector<std::string> failures;
};

/// Executes the configured tasks. Throws AdmissibilityError when a corpus
/// cannot be sampled; everything else ends up in the report.
RunResult run(const RunConfig& config, unsigned workers = 0);

/// Shipped families as a report fragment.
nlohmann::ordered_json families();

}  // namespace finsler::lab
