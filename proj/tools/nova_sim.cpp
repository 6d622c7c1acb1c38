// nova-sim: run a discovery-loop experiment or a named preset.
//
//   nova-sim <experiment|preset-name> --config <path> [--seed N] [--out DIR] [--replicates N]
//
// A preset is the base config; a --config file given alongside it is applied on
// top, and flags override both.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nova/config.hpp"
#include "nova/error.hpp"
#include "nova/experiments.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nova::Error(nova::ErrorKind::Config, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_preset(const std::string& name) {
  const auto names = nova::preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

// `contamination` names both an experiment and a preset: with --config it is the
// experiment, alone it is the preset (a config file can still say "preset").
// Flag overrides arrive as a JSON patch so they are validated with the rest.
nova::ExperimentConfig load(const std::string& target, const std::string& config_path, const nlohmann::json& flags) {
  const auto kind = nova::parse_experiment_kind(target);
  if (is_preset(target) && !(kind && !config_path.empty())) {
    auto base = nova::preset(target);
    if (!config_path.empty()) {
      auto doc = nlohmann::json::parse(slurp(config_path), nullptr, false);
      if (!doc.is_object()) return nova::parse_config(slurp(config_path), base);  // reports the syntax error
      doc.merge_patch(flags);
      return nova::parse_config(doc.dump(), base);
    }
    return nova::parse_config(flags.dump(), base);
  }
  if (!kind) {
    std::string known;
    for (const auto& n : nova::preset_names()) known += " " + n;
    throw nova::Error(nova::ErrorKind::Config, "`" + target +
                                                   "` is neither an experiment (run, coverage, contamination, "
                                                   "scaling, cumcost, sustainability, estimate) nor a preset:" +
                                                   known);
  }
  if (config_path.empty()) throw nova::Error(nova::ErrorKind::Config, "experiment `" + target + "` needs --config");

  auto doc = nlohmann::json::parse(slurp(config_path), nullptr, false);
  if (doc.is_object()) {
    if (!doc.contains("experiment") && !doc.contains("preset")) {
      doc["experiment"] = target;
    } else if (doc.contains("experiment") && doc["experiment"] != target) {
      throw nova::Error(nova::ErrorKind::Config, "`experiment`: config says " + doc["experiment"].dump() +
                                                     " but the command line asks for `" + target + "`");
    }
    doc.merge_patch(flags);
    return nova::parse_config(doc.dump());
  }
  return nova::parse_config(slurp(config_path));  // reports the syntax error
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded simulator for the generate-verify-accumulate-retrain discovery loop"};
  std::string target, config_path, out_dir, batch_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates, threads;
  bool list = false;

  app.add_option("target", target, "experiment name or preset name");
  app.add_option("--config,-c", config_path, "JSON experiment config");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out,-o", out_dir, "output directory");
  app.add_option("--replicates", replicates, "number of replicates")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--batch", batch_path, "batch file for the estimate experiment");
  app.add_flag("--list-presets", list, "print the preset names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list) {
    for (const auto& n : nova::preset_names()) std::cout << n << '\n';
    return 0;
  }
  if (target.empty()) {
    std::cerr << app.help();
    return 2;
  }

  nova::ExperimentConfig config;
  try {
    nlohmann::json flags = nlohmann::json::object();
    if (seed) flags["seed"] = *seed;
    if (replicates) flags["replicates"] = *replicates;
    if (threads) flags["threads"] = *threads;
    if (!out_dir.empty()) flags["output"]["path"] = out_dir;
    if (!batch_path.empty()) flags["estimate"]["batch_file"] = batch_path;
    config = load(target, config_path, flags);
  } catch (const nova::Error& e) {
    std::cerr << "nova-sim: " << e.what() << '\n';
    return 2;
  }
  return nova::run_command(config, std::cout, std::cerr);
}
