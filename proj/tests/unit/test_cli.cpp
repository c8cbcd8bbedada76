#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "runner.hpp"

using namespace finsler;
using namespace finsler::lab;
using nlohmann::ordered_json;

namespace {

const std::string kSource = FINSLER_SOURCE_DIR;
const std::string kGolden = kSource + "/tests/golden/";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int exit_code_of(const std::string& args) {
  const std::string cmd = std::string(FINSLER_LAB_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("configuration was accepted: " << text);
  return ConfigError("unreachable");
}

const std::string kEuclidean = "metrics:\n  - {name: e3, family: euclidean, n: 3}\n";

// Structural equality with a numeric tolerance on leaves.
void compare_json(const ordered_json& got, const ordered_json& want, const std::string& path) {
  CAPTURE(path);
  if (want.is_number() && got.is_number()) {
    const double a = got.get<double>(), b = want.get<double>();
    CHECK(std::abs(a - b) <= 1e-10 + 1e-6 * std::max(std::abs(a), std::abs(b)));
    return;
  }
  REQUIRE(got.type() == want.type());
  if (want.is_object()) {
    REQUIRE(got.size() == want.size());
    auto g = got.begin();
    for (auto w = want.begin(); w != want.end(); ++w, ++g) {
      REQUIRE(g.key() == w.key());
      compare_json(g.value(), w.value(), path + "/" + w.key());
    }
  } else if (want.is_array()) {
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) compare_json(got[k], want[k], path + "/" + std::to_string(k));
  } else {
    CHECK(got == want);
  }
}

}  // namespace

TEST_CASE("configuration errors carry line and column") {
  auto e = parse_error(kEuclidean + "tasks: [tensors, bogus]\n");
  CHECK(e.line() == 3);
  CHECK(e.column() == 18);
  CHECK(std::string(e.what()).find("unknown task") != std::string::npos);

  e = parse_error("metrics:\n  - {name: e3, family: euclidean, n: 3, colour: red}\ntasks: [tensors]\n");
  CHECK(e.line() == 2);
  CHECK(std::string(e.what()).find("unknown key 'colour'") != std::string::npos);

  e = parse_error("metrics:\n  - name: r\n    family: riemannian\n    n: 2\n    a: [[\"1 + * x1\", 0], [0, 1]]\n"
                  "tasks: [tensors]\n");
  CHECK(e.line() == 5);

  e = parse_error("metrics:\n  - {name: w, family: warped, n: 3}\ntasks: [tensors]\n");
  CHECK(std::string(e.what()).find("unknown family") != std::string::npos);

  e = parse_error(kEuclidean + "tasks: [concircular]\n");
  CHECK(std::string(e.what()).find("need at least one candidate") != std::string::npos);

  e = parse_error(kEuclidean + "candidates:\n  - {name: c, metrics: [nope], components: [x1, x2, x3]}\n"
                               "tasks: [concircular]\n");
  CHECK(e.line() == 4);

  e = parse_error("metrics: [\n");
  CHECK(e.line() >= 1);

  e = parse_error("metrics:\n  - {name: e7, family: euclidean, n: 7}\ntasks: [tensors]\n");
  CHECK(std::string(e.what()).find("between 2 and 6") != std::string::npos);
}

TEST_CASE("configuration defaults and overrides") {
  auto c = parse_config(kEuclidean + "tasks: [identity-battery]\n");
  CHECK(c.points == 50);
  CHECK(c.seed == 1);
  CHECK(c.tol.abs == 1e-8);
  CHECK(c.tol.rel == 1e-7);
  CHECK(c.metrics.front().x_box().front() == std::pair<double, double>{-0.5, 0.5});
  Overrides o;
  o.points = 3;
  o.seed = 42;
  o.tol_abs = 1e-6;
  apply(c, o);
  CHECK(c.points == 3);
  CHECK(c.seed == 42);
  CHECK(c.tol.abs == 1e-6);
  CHECK(c.tol.rel == 1e-7);
  CHECK(c.hash == fnv1a(kEuclidean + "tasks: [identity-battery]\n"));
}

TEST_CASE("flat identity battery run passes") {
  auto c = parse_config(kEuclidean + "sampling: {points: 5}\ntasks: [identity-battery]\n");
  const auto r = run(c, 1);
  CHECK(r.exit_code == kExitPass);
  CHECK(r.failures.empty());
  CHECK(r.report["metrics"]["e3"]["identity_battery"]["T(X,eta) = 0"]["holds"] == true);
}

TEST_CASE("Randers classification run reports riemannian fail and C-reducible pass") {
  auto c = parse_config(
      "sampling: {points: 6, seed: 3}\n"
      "metrics:\n  - {name: r3, family: randers, n: 3, a: identity, b: [0.3, 0, 0]}\n"
      "tasks: [tensors, classify]\n");
  const auto r = run(c, 1);
  CHECK(r.exit_code == kExitPass);  // a failed predicate is a finding, not a failed check
  const auto& p = r.report["metrics"]["r3"]["classify"]["predicates"];
  CHECK(p["riemannian"]["verdict"] == "fail");
  CHECK(p["C-reducible"]["verdict"] == "pass");
  CHECK(p["berwald"]["verdict"] == "pass");
}

TEST_CASE("verify-theorems run has satisfied instances and no violations") {
  auto c = load_config(kGolden + "golden.yaml");
  const auto r = run(c, 1);
  CHECK(r.exit_code == kExitPass);
  const auto& s = r.report["theorems"]["summary"];
  CHECK(s["violated"] == 0);
  CHECK(s["satisfied_nontrivial"].get<int>() >= 3);
}

TEST_CASE("an expectation mismatch fails the run") {
  const auto r = run(load_config(kGolden + "expect_mismatch.yaml"), 1);
  CHECK(r.exit_code == kExitCheckFailed);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures.front().find("expected concurrent") != std::string::npos);
}

TEST_CASE("reports are deterministic and independent of the worker count") {
  const auto c = load_config(kGolden + "golden.yaml");
  const auto a = run(c, 1).report.dump();
  const auto b = run(c, 1).report.dump();
  const auto d = run(c, 4).report.dump();
  CHECK(a == b);
  CHECK(a == d);
}

TEST_CASE("golden report matches within numeric tolerance") {
  const auto got = run(load_config(kGolden + "golden.yaml"), 0).report;
  const auto want = ordered_json::parse(slurp(kGolden + "golden_report.json"));
  compare_json(got, want, "");
  // the golden run documents non-vacuous theorem instances
  int nontrivial = 0;
  for (const auto& in : want["theorems"]["instances"])
    if (in["status"] == "satisfied" && in["trivial"] == false) ++nontrivial;
  CHECK(nontrivial >= 3);
}

TEST_CASE("command line exit codes") {
  CHECK(exit_code_of("families") == kExitPass);
  CHECK(exit_code_of("run " + kGolden + "golden.yaml --points 3") == kExitPass);
  CHECK(exit_code_of("run " + kGolden + "expect_mismatch.yaml") == kExitCheckFailed);
  CHECK(exit_code_of("run " + kGolden + "bad_expression.yaml") == kExitConfigError);
  CHECK(exit_code_of("run " + kGolden + "inadmissible.yaml") == kExitConfigError);
  CHECK(exit_code_of("run " + kGolden + "does_not_exist.yaml") == kExitConfigError);
  CHECK(exit_code_of("run") == kExitConfigError);
  CHECK(exit_code_of("run " + kGolden + "golden.yaml --points nope") == kExitConfigError);
}

TEST_CASE("command line writes the report to --out") {
  const std::string out = "cli_out_report.json";
  std::remove(out.c_str());
  REQUIRE(exit_code_of("run " + kGolden + "expect_mismatch.yaml --out " + out) == kExitCheckFailed);
  const auto j = ordered_json::parse(slurp(out));
  CHECK(j["result"]["exit_code"] == kExitCheckFailed);
  CHECK(j["provenance"]["points"] == 4);
}
