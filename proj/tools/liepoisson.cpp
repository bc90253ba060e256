#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "liepoisson/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lie-Poisson dynamics on Lie algebroid duals: simulation and verification suites"};
  app.require_subcommand(1);
  app.fallthrough();

  lp::CliOptions opt;
  std::uint64_t seed = 0;
  app.add_option("--config", opt.config, "JSON run configuration");
  app.add_option("--out", opt.out, "Output directory for CSV and JSON reports")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Override check.seed");
  app.add_flag("--quiet", opt.quiet, "Suppress report output on stdout");

  const char* help[] = {"Integrate and write a trajectory CSV",
                        "Check the anchor and Jacobi structure equations",
                        "Check bracket laws and the defining bracket relations",
                        "Compare the coordinate and connection forms of the vector field",
                        "First-variation test of the variational principle",
                        "Legendre round trip and Euler-Lagrange-Poincare residual",
                        "List built-in systems and their parameters"};
  std::string chosen;
  for (std::size_t k = 0; k < lp::subcommands().size(); ++k) {
    const std::string name = lp::subcommands()[k];
    app.add_subcommand(name, help[k])->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lp::kExitConfig;
  }
  if (*seed_opt) opt.seed = seed;
  return lp::run_command(chosen, opt, std::cout, std::cerr);
}
