#include <CLI11.hpp>

#include <iostream>

#include "qedbohm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cavity QED double-well simulation with Bohmian pointer trajectories"};
  app.require_subcommand(1);

  std::string run_scenario, run_out;
  std::vector<std::string> run_positional, run_sets;
  std::uint64_t run_seed = 0;
  bool no_measure = false;
  auto* run = app.add_subcommand("run", "evolve a scenario and write its outputs");
  run->add_option("scenario", run_scenario, "scenario file")->required();
  run->add_option("args", run_positional, "[out_dir] [key=value ...]");
  run->add_option("--out,-o", run_out, "output directory");
  run->add_option("--set", run_sets, "key=value override (repeatable)");
  auto* seed_opt = run->add_option("--seed", run_seed, "trajectory seed");
  run->add_flag("--no-measure", no_measure, "disable the pointer coupling");

  std::string plot_dir, plot_out;
  auto* plot = app.add_subcommand("plot", "render SVG figures from a run directory");
  plot->add_option("dir", plot_dir, "run directory");
  plot->add_option("--out,-o", plot_out, "run directory");

  std::string verify_scenario;
  qedbohm::VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "run the numerical oracle battery");
  verify->add_option("scenario", verify_scenario, "scenario file (default configuration if omitted)");
  verify->add_flag("--corrupt-coupling-sign", verify_opts.corrupt_coupling_sign,
                   "negate upper-triangle coupling entries (fault injection)");
  verify->add_option("--seed", verify_opts.seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*run) {
    qedbohm::RunOptions opts;
    opts.overrides = run_sets;
    std::string out = run_out;
    for (const auto& a : run_positional) {
      if (a.find('=') != std::string::npos) {
        opts.overrides.push_back(a);
      } else if (out.empty()) {
        out = a;
      } else {
        std::cerr << "error: unexpected argument '" << a << "'\n";
        return 1;
      }
    }
    if (out.empty()) out = "out";
    if (*seed_opt) opts.seed = run_seed;
    opts.no_measure = no_measure;
    return qedbohm::cmd_run(run_scenario, out, opts, std::cout, std::cerr);
  }
  if (*plot) {
    const std::string dir = plot_out.empty() ? (plot_dir.empty() ? "out" : plot_dir) : plot_out;
    return qedbohm::cmd_plot(dir, std::cout, std::cerr);
  }
  return qedbohm::cmd_verify(verify_scenario, verify_opts, std::cout, std::cerr);
}
