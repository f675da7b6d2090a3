// ionnode: command-line driver for the simulated node experiments.
//
//   ionnode <experiment> [--config path] [--seed N] [--trials N] [--shots N] [--out dir] [--workers N]
//   ionnode run --circuit file [...]
//
// Exit status: 0 PASS, 2 acceptance FAIL, 1 error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ionnode/experiments.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<std::int64_t> shots;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--trials", o.trials, "number of protocol trials")->check(CLI::PositiveNumber);
  sub->add_option("--shots", o.shots, "successful shots per setting")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1, 256));
}

ionnode::cli::RunConfig resolve(const Overrides& o) {
  ionnode::cli::RunConfig cfg;
  if (!o.config.empty()) cfg = ionnode::cli::load_config(o.config);
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.shots) cfg.shots = *o.shots;
  if (o.out) cfg.output_dir = *o.out;
  if (o.workers) cfg.workers = *o.workers;
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated dual-type trapped-ion network node"};
  app.require_subcommand(1);
  Overrides o;
  std::string circuit_path;

  for (const auto& name : ionnode::cli::experiment_names()) add_common(app.add_subcommand(name, "run the " + name + " experiment"), o);
  auto* run = app.add_subcommand("run", "run a circuit file with the calibrated noise model");
  add_common(run, o);
  run->add_option("--circuit", circuit_path, "circuit text file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    auto cfg = resolve(o);
    cfg.experiment = name;
    ionnode::cli::Report report;
    try {
      report = name == "run" ? ionnode::cli::cmd_run_circuit(cfg, read_file(circuit_path))
                             : ionnode::cli::run_experiment(name, cfg);
    } catch (const std::exception& e) {
      throw std::runtime_error(name + ": " + e.what());
    }
    ionnode::cli::write_report(report, cfg);
    std::cout << report.verdict_line() << '\n';
    return report.pass ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
