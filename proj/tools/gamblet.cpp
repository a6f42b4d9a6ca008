// Command-line front end: gamblet <solve|transform|bases|report> --config <path>
#include <iostream>

#include <CLI11.hpp>

#include "gamblet/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Operator-adapted wavelet (gamblet) solver for rough-coefficient elliptic problems"};
  app.require_subcommand(1);

  gamblet::CommandArgs args;
  std::string config, out;
  int threads = -1;
  for (const char* name : {"solve", "transform", "bases", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "INI run description")->required();
    sub->add_option("--out", out, "output directory (overrides [output] dir)");
    sub->add_option("--threads", threads, "worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber);
  }
  app.get_subcommand("solve")->description("solve the configured problem, write u and its increments");
  app.get_subcommand("transform")->description("build the multiresolution bases only (zero load)");
  app.get_subcommand("bases")->description("export selected psi / chi basis functions");
  app.get_subcommand("report")->description("decay, conditioning, spectrum, compression, convergence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : gamblet::kExitUsage;
  }
  args.command = app.get_subcommands().front()->get_name();
  args.config = config;
  if (!out.empty()) args.out = out;
  if (threads >= 0) args.threads = threads;
  return gamblet::run_command(args, std::cerr);
}
