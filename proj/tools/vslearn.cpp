#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "vsl/commands.hpp"
#include "vsl/errors.hpp"

namespace {

// --set key=value, same keys as the config file.
std::pair<std::string, std::string> split_kv(const std::string& entry) {
  const auto eq = entry.find('=');
  if (eq == std::string::npos || eq == 0)
    throw vsl::ConfigError("--set expects key=value, got '" + entry + "'");
  return {entry.substr(0, eq), entry.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learns a society's value system from pairwise choice data: "
               "shared value grounding functions plus clustered per-group "
               "value weights."};
  app.require_subcommand(1);

  std::string config_path, profile, dataset, out_dir, seeds;
  std::string method = "both", bundle;
  std::uint64_t seed = 0;
  int lmax = 1, steps = 0, epochs = 0;
  bool synthetic = false, no_ascent = false;
  std::vector<std::string> sets;
  std::vector<int> budgets;

  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--profile", profile, "hyperparameter profile: route | synthetic");
  app.add_option("--lmax", lmax, "cluster budget");
  app.add_option("--seed", seed, "single training seed");
  app.add_option("--seeds", seeds, "comma-separated training seeds");
  app.add_option("--steps", steps, "outer search steps");
  app.add_option("--epochs", epochs, "EM epochs per refinement");
  app.add_option("--dataset", dataset, "choice CSV path");
  app.add_flag("--synthetic", synthetic, "use a generated society instead of a CSV");
  app.add_option("--out", out_dir, "output bundle directory");
  app.add_flag("--no-lagrange-ascent", no_ascent, "freeze the grounding multipliers");
  app.add_option("--set", sets, "extra key=value override, repeatable");

  CLI::App* learn = app.add_subcommand("learn", "fit value systems and write a bundle");
  CLI::App* sweep = app.add_subcommand("sweep", "fit several cluster budgets and compare");
  sweep->add_option("budgets", budgets, "cluster budgets to try")->required();
  CLI::App* baseline = app.add_subcommand("baseline", "fit reference models");
  baseline->add_option("--method", method, "flat | sequential | both");
  CLI::App* ablate = app.add_subcommand("ablate-lagrange",
                                        "compare multiplier ascent on vs off");
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  CLI::App* report = app.add_subcommand("report", "re-render a bundle's cluster report");
  report->add_option("bundle", bundle, "bundle directory or champion.json")->required();
  for (CLI::App* sub : {learn, sweep, baseline, ablate, synth, report})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::vector<std::pair<std::string, std::string>> file_kvs, cli_kvs;
    if (app.count("--config"))
      file_kvs = vsl::cli::read_config_file(config_path);
    auto add = [&](const char* key, const std::string& value) {
      cli_kvs.emplace_back(key, value);
    };
    if (app.count("--profile")) add("profile", profile);
    if (app.count("--lmax")) add("lmax", std::to_string(lmax));
    if (app.count("--seed")) add("seed", std::to_string(seed));
    if (app.count("--seeds")) add("seeds", seeds);
    if (app.count("--steps")) add("steps", std::to_string(steps));
    if (app.count("--epochs")) add("epochs", std::to_string(epochs));
    if (app.count("--dataset")) add("dataset", dataset);
    if (synthetic) add("synthetic", "true");
    if (app.count("--out")) add("out", out_dir);
    if (no_ascent) add("ascent", "false");
    for (const auto& entry : sets) {
      auto [k, v] = split_kv(entry);
      add(k.c_str(), v);
    }

    vsl::cli::ExperimentConfig cfg = vsl::cli::resolve_config(file_kvs, cli_kvs);
    if (learn->parsed()) return vsl::cli::cmd_learn(cfg);
    if (sweep->parsed()) return vsl::cli::cmd_sweep(cfg, budgets);
    if (baseline->parsed()) return vsl::cli::cmd_baseline(cfg, method);
    if (ablate->parsed()) return vsl::cli::cmd_ablate(cfg);
    if (synth->parsed()) return vsl::cli::cmd_synth(cfg);
    if (report->parsed()) return vsl::cli::cmd_report(cfg, bundle);
    return 2;
  } catch (const vsl::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const vsl::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const vsl::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
