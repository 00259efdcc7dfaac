#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kmeasure/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fixed points, evolution and metrics for collision operators on atomic measures"};
  app.require_subcommand(1);

  struct Command {
    kmeasure::RunKind kind;
    CLI::App* app;
  };
  std::string scenario;
  std::string output;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::vector<Command> commands;
  for (const auto& [name, kind, help] :
       {std::tuple{"fixpoint", kmeasure::RunKind::Fixpoint, "Iterate the collision operator to a fixed point"},
        std::tuple{"evolve", kmeasure::RunKind::Evolve, "Integrate dpsi/dt + psi = P psi in time"},
        std::tuple{"metrics", kmeasure::RunKind::Metrics, "Compare the initial and target measures"},
        std::tuple{"mc-compare", kmeasure::RunKind::McCompare,
                   "Compare one exact operator application with Monte Carlo"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", output, "Output directory (default: output_dir from the scenario)");
    sub->add_option("--seed", seed, "Random seed (default: seed from the scenario)");
    sub->add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);
    commands.push_back({kind, sub});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kmeasure::kExitConfig;
  }

  kmeasure::RunOptions options;
  for (const auto& c : commands) {
    if (c.app->parsed()) {
      options.command = c.kind;
      if (c.app->count("--seed") > 0) options.seed = seed;
      if (c.app->count("--output") > 0) options.output_dir = output;
    }
  }
  options.threads = threads;
  options.log = &std::cerr;
  return kmeasure::run_scenario_file(scenario, options);
}
