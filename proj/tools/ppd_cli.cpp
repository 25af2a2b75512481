// Command-line front end for the experiment registry.
//
//   ppd_cli list
//   ppd_cli describe <id>
//   ppd_cli run --experiment <id> [--config cfg.json] [--seed N] [--out DIR] [--jobs N]
//   ppd_cli --experiment <id> ...            (same as run)
//   ppd_cli rerun <metadata.json> [--out DIR] [--jobs N]

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "json.hpp"
#include "ppd/experiments.hpp"

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void print_report(const ppd::ExperimentReport& r) {
  if (!r.table.empty()) std::cout << r.table;
  std::cout << r.summary.dump(2) << '\n';
  for (const auto& f : r.files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact posterior predictive experiments on finite priors"};
  app.set_version_flag("--version", ppd::library_version());
  app.require_subcommand(0, 1);

  std::string experiment;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  unsigned jobs = 0;

  auto add_run_options = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--experiment,-e", experiment, "experiment id (see `list`)");
    if (required) opt->required();
    cmd->add_option("--config,-c", config_path, "JSON file with config overrides")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed,-s", seed, "RNG seed");
    cmd->add_option("--out,-o", out_dir, "output directory");
    cmd->add_option("--jobs,-j", jobs, "worker threads (0 = all cores)");
  };
  add_run_options(&app, false);

  auto* list = app.add_subcommand("list", "list registered experiments");
  auto* describe = app.add_subcommand("describe", "show defaults and outputs of an experiment");
  std::string describe_id;
  describe->add_option("id", describe_id)->required();
  auto* run = app.add_subcommand("run", "run an experiment");
  add_run_options(run, true);
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its metadata.json");
  std::string metadata_path;
  rerun->add_option("metadata", metadata_path)->required()->check(CLI::ExistingFile);
  rerun->add_option("--out,-o", out_dir, "output directory");
  rerun->add_option("--jobs,-j", jobs, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& e : ppd::experiment_registry()) {
        std::cout << e.id << "  [" << e.figure << "]  " << e.summary << '\n';
      }
      return 0;
    }
    if (*describe) {
      const auto& e = ppd::find_experiment(describe_id);
      std::cout << e.id << " [" << e.figure << "]\n" << e.summary << "\n\ndefaults:\n"
                << e.defaults.dump(2) << "\n\noutputs:\n";
      for (const auto& o : e.outputs) std::cout << "  " << o << '\n';
      return 0;
    }
    ppd::ExperimentSpec spec;
    if (*rerun) {
      spec = ppd::spec_from_metadata(read_json_file(metadata_path));
      if (rerun->count("--jobs") > 0) spec.jobs = jobs;
    } else {
      if (experiment.empty()) {
        std::cerr << app.help();
        return 2;
      }
      spec.id = experiment;
      spec.seed = seed;
      spec.jobs = jobs;
      if (!config_path.empty()) spec.config = read_json_file(config_path);
    }
    spec.out_dir = out_dir;
    print_report(ppd::run_experiment(spec));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "ppd_cli: error: " << e.what() << '\n';
    return 1;
  }
}
