// Command-line front end: stp <command> --config <path> [--out <path>] [--seq] [--budget <words>]

#include <iostream>

#include "CLI11.hpp"
#include "stp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Shrinking-target pressure and dimension toolkit"};
  app.require_subcommand(1);

  stp::cli::RunOptions options;
  std::string out;
  std::uint64_t budget = 0;
  for (const auto& name : stp::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config_path, "Config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output path (default: [run] out, else stdout)");
    sub->add_flag("--seq", options.sequential, "Sequential reduction (bit-exact)");
    sub->add_option("--budget", budget, "Word budget per enumeration")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : stp::cli::config_error;
  }

  options.command = app.get_subcommands().front()->get_name();
  if (!out.empty()) options.out_path = out;
  if (budget > 0) options.budget = budget;
  return stp::cli::run_file(options, std::cout, std::cerr);
}
