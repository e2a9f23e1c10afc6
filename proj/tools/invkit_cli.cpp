// Command-line harness: simulate datasets, run reconstruction experiments,
// check operator adjoints.
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "invkit/experiment.hpp"
#include "invkit/version.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kRuntimeError = 2 };

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return kOk;
  } catch (const invkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruction experiments for linear imaging inverse problems", "invkit"};
  app.require_subcommand(1);

  std::string config;
  auto* generate = app.add_subcommand("generate", "simulate the paired dataset described by a config");
  generate->add_option("config", config, "experiment config (JSON)")->required();
  auto* run = app.add_subcommand("run", "reconstruct every sample and write results.csv");
  run->add_option("config", config, "experiment config (JSON)")->required();
  auto* adjoint = app.add_subcommand("adjoint-check", "dot-test the configured physics");
  adjoint->add_option("config", config, "experiment config (JSON)")->required();
  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  if (version->parsed()) {
    std::cout << "invkit " << invkit::kVersion << '\n';
    return kOk;
  }
  if (generate->parsed())
    return guarded([&] {
      const auto cfg = invkit::load_config(config);
      const auto manifest = invkit::dataset_generate(cfg);
      std::cout << "wrote " << manifest.at("count").get<long>() << " samples to " << cfg.output.string() << '\n';
    });
  if (run->parsed())
    return guarded([&] {
      const auto cfg = invkit::load_config(config);
      invkit::run_experiment(cfg, std::cout);
      std::cout << "wrote " << (cfg.output / "results.csv").string() << '\n';
    });
  if (adjoint->parsed()) {
    int code = kOk;
    const int status = guarded([&] {
      const auto cfg = invkit::load_config(config);
      const double err = invkit::adjoint_check(cfg);
      std::printf("max relative adjoint error: %.3e\n", err);
      if (!(err <= 1e-10)) code = kRuntimeError;
    });
    return status != kOk ? status : code;
  }
  return kConfigError;
}
