#include "pargate/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"pargate: crosstalk-robust parallel gate synthesis and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pargate::kVersion));

  pargate::RunOptions options;
  std::uint64_t seed_override = 0;

  CLI::App* run = app.add_subcommand("run", "run an experiment config end to end");
  run->add_option("-c,--config", options.config_path, "experiment config (json)")->required();
  run->add_option("-o,--out", options.out_dir, "output directory (overrides the config)");
  run->add_option("-w,--workers", options.workers,
                  "worker threads (0 defers to config / PARGATE_WORKERS / hardware)");
  CLI::Option* run_seed =
      run->add_option("--seed-override", seed_override, "replace the config seed");

  CLI::App* verify =
      app.add_subcommand("verify", "parse and size-check a config without running it");
  verify->add_option("-c,--config", options.config_path, "experiment config (json)")->required();
  CLI::Option* verify_seed =
      verify->add_option("--seed-override", seed_override, "replace the config seed");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    options.has_seed_override = run_seed->count() > 0;
    options.seed_override = seed_override;
    return pargate::run_pipeline(options);
  }
  options.has_seed_override = verify_seed->count() > 0;
  options.seed_override = seed_override;
  return pargate::verify_config(options);
}
