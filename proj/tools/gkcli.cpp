#include "gknockoff/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"FDR-controlled structural change detection"};
  app.require_subcommand(1);

  gk::cli::CommandArgs args;

  const auto add_common = [&](CLI::App* sub, bool needs_data) {
    sub->add_option("--config", args.config_path, "key = value configuration file")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory")->required();
    if (needs_data) {
      sub->add_option("--data", args.data_path, "input CSV file")->required();
    }
    sub->add_option_function<std::uint64_t>(
        "--seed", [&args](const std::uint64_t& v) { args.seed_override = v; },
        "override the config seed");
    sub->add_option_function<int>(
        "--threads", [&args](const int& v) { args.threads_override = v; },
        "override the config thread count");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo study");
  add_common(simulate, false);
  CLI::App* detect = app.add_subcommand("detect", "detect structural changes in a CSV");
  add_common(detect, true);
  CLI::App* screen = app.add_subcommand("screen", "rank candidate change locations");
  add_common(screen, true);

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) return gk::cli::cmd_simulate(args);
  if (detect->parsed()) return gk::cli::cmd_detect(args);
  return gk::cli::cmd_screen(args);
}
