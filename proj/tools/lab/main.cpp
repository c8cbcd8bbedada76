#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "runner.hpp"

using namespace finsler;
using namespace finsler::lab;

int main(int argc, char** argv) {
  CLI::App app{"Finsler geometry lab: tensors, special spaces and concircular fields"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  Overrides o;
  unsigned workers = 0;
  auto* run_cmd = app.add_subcommand("run", "Execute the tasks of a run configuration");
  run_cmd->add_option("config", config_path, "YAML run configuration")->required();
  run_cmd->add_option("--tol-abs", o.tol_abs, "Absolute tolerance");
  run_cmd->add_option("--tol-rel", o.tol_rel, "Relative tolerance");
  run_cmd->add_option("--seed", o.seed, "Sampling seed");
  run_cmd->add_option("--points", o.points, "Sample points per metric");
  run_cmd->add_option("--out", out_path, "Write the report here instead of stdout");
  run_cmd->add_option("--workers", workers, "Worker threads (0: all cores)");
  auto* fam_cmd = app.add_subcommand("families", "List the shipped metric families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfigError;
  }

  if (*fam_cmd) {
    for (const auto& f : families())
      std::cout << f["family"].get<std::string>() << "\t" << f["description"].get<std::string>() << "\n";
    return 0;
  }

  RunResult res;
  try {
    auto config = load_config(config_path);
    apply(config, o);
    res = run(config, workers);
  } catch (const ConfigError& e) {
    std::cerr << config_path << (e.line() > 0 ? ":" : ": ") << e.what() << "\n";
    return kExitConfigError;
  } catch (const AdmissibilityError& e) {
    std::cerr << "admissibility error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitConfigError;
  }

  const std::string body = res.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return kExitConfigError;
    }
    out << body;
  }
  for (const auto& f : res.failures) std::cerr << "FAIL " << f << "\n";
  std::cerr << (res.exit_code == kExitPass ? "all checks passed" : "some checks failed") << "\n";
  return res.exit_code;
}
