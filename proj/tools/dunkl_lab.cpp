#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "dunkl/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for Dunkl-type functional inequalities"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int jobs = 1;

  struct Sub {
    const char* name;
    const char* help;
    dunkl::Command command;
  };
  const Sub subs[] = {
      {"verify-identities", "exact product rule, Laplacian and integration-by-parts identities", dunkl::Command::verify_identities},
      {"sample", "draw chains from mu_U and write them with diagnostics", dunkl::Command::sample},
      {"estimate-constants", "fit the constants of the existential inequalities", dunkl::Command::estimate_constants},
      {"check", "run the check named in the config", dunkl::Command::check},
      {"scan", "exponential integrability scan over growing balls", dunkl::Command::scan},
  };
  std::optional<dunkl::Command> chosen;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config, "experiment config (.json or .toml)")->required();
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out", out, "output directory, overrides the config");
    sub->add_option("--jobs", jobs, "worker threads for independent chains")->check(CLI::PositiveNumber);
    sub->callback([&chosen, c = s.command] { chosen = c; });
  }
  CLI::App* list = app.add_subcommand("list-checks", "print the check catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dunkl::exit_config;
  }
  if (list->parsed()) {
    std::cout << dunkl::list_checks();
    return dunkl::exit_ok;
  }
  return dunkl::run_command(*chosen, config, {seed, out, jobs}, std::cerr);
}
