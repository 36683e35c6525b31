#include <CLI11.hpp>

#include <iostream>

#include "bkb/harness.hpp"

int main(int argc, char** argv) {
  bkb::configure_logging();
  CLI::App app{"Budgeted kernel bandit experiments"};
  app.require_subcommand(1);

  bkb::CliOptions opts;
  std::string config, output;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config, "experiment config file");
    if (needs_config) c->required();
    sub->add_option("--output", output, "output directory (overrides run.output_dir)");
    sub->add_option("--workers", opts.workers, "parallel cells")->check(CLI::PositiveNumber);
    sub->add_option("--seed-offset", opts.seed_offset, "added to every configured seed");
  };
  auto* run = app.add_subcommand("run", "run every algorithm x seed cell and write traces");
  auto* starvation = app.add_subcommand("starvation", "variance starvation demo");
  auto* verify = app.add_subcommand("verify", "accuracy, size and posterior property reports");
  auto* bench = app.add_subcommand("bench", "per-step timing of BKB and GP-UCB");
  add_common(run, true);
  add_common(starvation, false);
  add_common(verify, true);
  add_common(bench, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bkb::kExitConfig;
  }
  if (!config.empty()) opts.config = config;
  if (!output.empty()) opts.output = output;

  if (*run) return bkb::cmd_run(opts);
  if (*starvation) return bkb::cmd_starvation(opts);
  if (*verify) return bkb::cmd_verify(opts);
  return bkb::cmd_bench(opts);
}
