// paoi-lab <eval|sweep|optimize|simulate|check|reproduce> --config FILE [--seed N] [--out DIR]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "paoi/paoi.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Average peak age of information under preemptive threshold policies"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string figure;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config,-c", config_path, "JSON experiment file");
    if (config_required) opt->required();
    sub->add_option("--seed", seed, "override simulation.seed");
    sub->add_option("--out", out_dir, "override output.dir");
  };
  add_common(app.add_subcommand("eval", "zeta, E[Xr], E[Y] per policy"), true);
  add_common(app.add_subcommand("sweep", "zeta over a threshold grid, to sweep.csv"), true);
  add_common(app.add_subcommand("optimize", "optimal threshold and minimum average peak age"), true);
  add_common(app.add_subcommand("simulate", "Monte Carlo estimates per policy"), true);
  add_common(app.add_subcommand("check", "is preempting worth it?"), true);
  auto* reproduce = app.add_subcommand("reproduce", "figure data bundles");
  add_common(reproduce, false);
  reproduce->add_option("--figure,figure", figure, "fig4, fig5, fig6, fig7 or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : paoi::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::cout.imbue(std::locale::classic());
  try {
    paoi::ExperimentConfig cfg = config_path.empty() ? paoi::ExperimentConfig{}
                                                     : paoi::load_config(config_path);
    if (seed) cfg.simulation.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    if (command == "eval") return paoi::cmd_eval(cfg, std::cout);
    if (command == "sweep") return paoi::cmd_sweep(cfg, std::cout);
    if (command == "optimize") return paoi::cmd_optimize(cfg, std::cout);
    if (command == "simulate") return paoi::cmd_simulate(cfg, std::cout);
    if (command == "check") return paoi::cmd_check(cfg, std::cout);
    return paoi::cmd_reproduce(cfg, figure.empty() ? cfg.figure : figure, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "paoi-lab " << command << ": " << e.what() << "\n";
    return paoi::exit_code_for(e);
  }
}
