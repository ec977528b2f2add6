#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsl/dataset.hpp"
#include "vsl/evolution.hpp"
#include "vsl/synth.hpp"

namespace vsl::cli {

// Everything a run needs, resolved from profile defaults, then a config
// file, then command-line overrides (last wins).
struct ExperimentConfig {
  evo::SearchConfig search;
  std::vector<std::uint64_t> seeds{26};

  std::string profile = "route";  // route | synthetic
  std::string dataset_path;       // CSV input; empty means synthetic data
  bool synthetic = false;
  synth::SyntheticSpec synth;
  CsvSchema schema;

  std::string out_dir = "out";

  synth::FlatBtConfig flat;
  synth::SequentialConfig sequential;

  // Resolved override list (file order, then CLI order), kept so a sweep
  // can re-apply the same overrides on top of each cluster budget's profile.
  std::vector<std::pair<std::string, std::string>> overrides;

  void validate() const;
};

// Published hyperparameter profile for the route-choice study, chosen by
// the nearest tabulated cluster budget; "synthetic" is a fast profile
// tuned for the planted-structure benchmarks.
void apply_profile(ExperimentConfig& cfg, const std::string& name, int l_max);

// One key=value override; the same keys the config file accepts.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

/// Two-pass resolution: profile and l_max may themselves be overridden, so
// they are extracted first, the profile is applied, then every remaining
// override lands on top in order.
ExperimentConfig resolve_config(const std::vector<std::pair<std::string, std::string>>& file_overrides,
                                const std::vector<std::pair<std::string, std::string>>& cli_overrides);

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path);

// Canonical snapshot of every setting, one key=value per line.
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace vsl::cli
