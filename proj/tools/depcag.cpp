#include "depcag/commands.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

void apply_thread_cap() {
  const char* env = std::getenv("DEPCAG_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "warning: ignoring DEPCAG_THREADS='" << env << "'\n";
    return;
  }
  omp_set_num_threads(static_cast<int>(n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depcag: conjugacy certification for differential equations with piecewise constant argument"};
  app.require_subcommand(1);

  std::string config_path, preset, out_path;
  std::optional<std::uint64_t> seed;
  depcag::CommandOptions opt;
  std::vector<double> xi;

  for (const std::string& name : depcag::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    auto* cfg_opt = sub->add_option("--config", config_path, "JSON configuration file");
    auto* pre_opt = sub->add_option("--preset", preset, "built-in configuration")
                        ->check(CLI::IsMember(depcag::preset_names()));
    cfg_opt->excludes(pre_opt);
    sub->add_option("--out", out_path, "write the report here instead of stdout");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { seed = s; },
                                            "random seed (overrides the config)");
    if (name == "solve" || name == "conjugacy") {
      sub->add_option("--xi", xi, "initial state, comma separated")->delimiter(',')->allow_extra_args(false);
      sub->add_option("--tau", opt.tau, "initial time");
    }
    if (name == "solve" || name == "bounded" || name == "conjugacy")
      sub->add_option_function<double>("--t", [&](const double& v) { opt.t = v; }, "evaluation time");
    if (name == "bounded") sub->add_option("--g", opt.g, "forcing component (repeat per component)")->required();
    if (name == "conjugacy")
      sub->add_option("--cmd", opt.conj_cmd, "map or check to run")
          ->required()
          ->check(CLI::IsMember({"H", "L", "inverse", "holder", "map-check"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  opt.command = app.get_subcommands().front()->get_name();
  if (!xi.empty()) opt.xi = xi;
  if (config_path.empty() && preset.empty()) {
    std::cerr << "error: give --config <path> or --preset <name>\n";
    return 2;
  }
  apply_thread_cap();

  try {
    depcag::RunConfig cfg = preset.empty() ? depcag::load_config_file(config_path) : depcag::load_preset(preset);
    if (seed) cfg = depcag::with_seed(std::move(cfg), *seed);
    depcag::CommandOutput res = depcag::run_command(cfg, opt);
    if (out_path.empty()) {
      std::cout << res.body;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!(out << res.body)) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return 3;
      }
    }
    return res.exit_code;
  } catch (const depcag::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return 2;
  } catch (const depcag::Error& e) {
    std::cerr << "error (" << opt.command << "): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error (" << opt.command << "): " << e.what() << "\n";
    return 3;
  }
}
