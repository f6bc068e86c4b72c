// ggr-lab: numerical laboratory for the pressure of the dilute spin-polarized
// Fermi gas — scattering inputs, free-gas thermodynamics, cluster-diagram
// engines, an exact small-lattice oracle, and the assembled pressure bound.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "ggr/cli.hpp"
#include "ggr/errors.hpp"
#include "ggr/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ggr-lab: dilute Fermi gas pressure-bound laboratory"};
  app.set_version_flag("--version", std::string("ggr-lab ") + ggr::version_string);
  app.require_subcommand(1);

  ggr::cli::CliOptions opts;
  std::string command;
  const std::pair<const char*, const char*> commands[] = {
      {"scatter", "solve a radial scattering problem and report length and energy"},
      {"thermo", "sweep free-gas pressure, density, and correction coefficient over activity"},
      {"diagrams", "enumerate cluster diagrams and dump dual-engine values"},
      {"oracle", "compare the truncated expansion against exact small-ring traces"},
      {"bound", "assemble the pressure lower bound over a diluteness grid"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "path to the key = value configuration")
        ->required();
    sub->add_option("--out", opts.out_path, "output file (default: stdout)");
    sub->add_flag("--verify", opts.verify, "run cross-checks; exit 1 on any mismatch");
    sub->add_flag("--selftest", opts.selftest, "run built-in closed-form checks first");
    sub->add_option("--threads", opts.threads,
                    "worker threads (default: GGR_LAB_THREADS env var, then 1)");
    sub->add_option("--seed", opts.seed, "seed for randomized checks; recorded in the header");
    sub->callback([&command, name = std::string(name)] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e); // prints help/version or the parse error
    return code == 0 ? ggr::cli::exit_ok : ggr::cli::exit_input;
  }

  try {
    return ggr::cli::run_command(command, opts);
  } catch (const ggr::resource_error& e) {
    std::fprintf(stderr, "ggr-lab: resource guard: %s\n", e.what());
    return ggr::cli::exit_resource;
  } catch (const ggr::input_error& e) {
    std::fprintf(stderr, "ggr-lab: input error: %s\n", e.what());
    return ggr::cli::exit_input;
  } catch (const ggr::verify_error& e) {
    std::fprintf(stderr, "ggr-lab: verification failed: %s\n", e.what());
    return ggr::cli::exit_verify;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ggr-lab: %s\n", e.what());
    return ggr::cli::exit_verify;
  }
}
