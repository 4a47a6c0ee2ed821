#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "dpd/cli.hpp"
#include "dpd/config.hpp"
#include "dpd/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"constraint-coupled primal decomposition over a peer graph"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file (all defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "seed override (beats [algorithm] seed)");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "simulate and write the round trace as CSV");
  add_common(run_cmd);
  run_cmd->add_option("--out", out_path, "trace CSV path (beats [output] csv)");
  run_cmd->add_option("--threads", threads, "worker threads for the agent subproblems")
      ->check(CLI::PositiveNumber);

  CLI::App* ref_cmd =
      app.add_subcommand("reference", "print the centralized optimum and penalty resolution");
  add_common(ref_cmd);

  CLI::App* val_cmd = app.add_subcommand("validate", "run the property suites and report");
  add_common(val_cmd);
  val_cmd->add_option("--threads", threads, "worker threads for the algorithm runs")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    dpd::Config cfg = config_path.empty() ? dpd::Config{} : dpd::load_config(config_path);
    if (active->count("--seed") > 0) cfg.algo.seed = seed;
    if (active == run_cmd) {
      const std::string out = run_cmd->count("--out") > 0 ? out_path : cfg.csv_path;
      return dpd::cmd_run(cfg, out, threads);
    }
    if (active == ref_cmd) return dpd::cmd_reference(cfg);
    return dpd::cmd_validate(cfg, threads);
  } catch (const dpd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const dpd::GenerationError& e) {
    std::cerr << "generation error: " << e.what() << "\n";
    return 2;
  } catch (const dpd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
