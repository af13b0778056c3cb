#include <iostream>

#include <CLI11.hpp>

#include "dbarw/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DBARW simulation lab: exact dynamics, assumption audits, drift and recurrence"};
  app.require_subcommand(1);
  dbarw::CliOptions opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON run configuration")->required();
    sub->add_option("--jobs", opt.jobs, "worker threads for replicas")->default_val(1);
    sub->add_option("--out", opt.out, "output directory (default ./out)");
    sub->add_option("--seed", opt.seed, "seed overriding run.seed");
  };
  for (const char* name : {"simulate", "ensemble", "drift-audit", "recurrence"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "drift-audit") {
      sub->add_option("--samples", opt.samples, "number of sampled configurations");
      sub->add_option("--width", opt.width, "maximal width of sampled configurations");
    }
  }
  auto* validate = app.add_subcommand("validate", "audit assumptions A0-A5");
  add_common(validate);
  validate->add_option("--samples", opt.samples, "samples per assumption");
  validate->add_option("--width", opt.width, "maximal width of sampled configurations");
  auto* dominate = app.add_subcommand("dominate", "coupled dominating processes");
  add_common(dominate);
  dominate->add_option("--K", opt.K, "rate constant of the maximum width process");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : dbarw::exit_code::config_parse;
  }
  opt.command = app.get_subcommands().front()->get_name();
  return dbarw::run_command(opt, std::cout, std::cerr);
}
