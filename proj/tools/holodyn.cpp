#include "holodyn/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace holodyn;

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for holomorphic self-maps of C^n"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kVersion);

  cli::Overrides ov;
  std::string config, map, out, slice;
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> sets;

  for (const char* name : {"periodic", "julia", "conley", "perturb", "hakim"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config file");
    sub->add_option("--map", map, "map JSON file (overrides config 'map')");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--threads", threads, "worker cap, 0 = all cores");
    sub->add_option("--set", sets, "override a config key: key=value (value as JSON)");
    if (std::string(name) == "julia") sub->add_option("--slice", slice, "fix z_2 = re0 + i im0 and grid the z_1 plane: re0,im0");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->count("--config")) ov.config_path = config;
  if (sub->count("--map")) ov.map_path = map;
  if (sub->count("--out")) ov.out = out;
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--threads")) ov.threads = threads;
  if (sub->get_name() == "julia" && sub->count("--slice")) ov.slice = slice;
  ov.sets = sets;

  try {
    auto rc = cli::resolve(sub->get_name(), ov);
    cli::run(rc);
    std::cout << rc.tag() << " -> " << rc.out_dir << "\n";
    return 0;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what();
    if (e.stage() >= 0) std::cerr << " (stage " << e.stage() << ", minimal feasible eps " << e.min_feasible_eps() << ")";
    std::cerr << "\n";
    return 3;
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const OverflowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
