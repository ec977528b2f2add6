#pragma once

#include <string>
#include <vector>

#include "vsl/config.hpp"
#include "vsl/evolution.hpp"
#include "vsl/report.hpp"

namespace vsl::cli {

// Experiment inputs, either parsed from a CSV or generated in memory.
struct LoadedData {
  ValueSystemDataset vs;
  GroundingDataset grounding;
  std::vector<AgentContext> contexts;
  bool has_context = false;
  std::vector<std::string> warnings;
  double excluded_fraction = 0.0;  // comfort instances dropped as conflicting
};

LoadedData load_data(const ExperimentConfig& cfg);

// One seed's outcome; `epochs` is filled on the direct single-cluster
// path, `steps` on the evolutionary search path.
struct SeedRun {
  evo::Candidate champion;
  std::vector<evo::Candidate> memory;
  train::CoherenceBest coherence_best;
  std::vector<evo::StepRow> steps;
  std::vector<train::EpochRow> epochs;
  bool direct = false;
};

SeedRun run_seed(const evo::SearchConfig& base, std::uint64_t seed,
                 const ValueSystemDataset& vs, const GroundingDataset& gr);

// Scores a trained state against its data; ev must hold state.theta.
report::ClusterReport make_report(const net::Evaluator& ev,
                                  const train::EmState& state,
                                  const ValueSystemDataset& vs,
                                  const GroundingDataset& gr,
                                  const std::vector<AgentContext>* contexts);

// Subcommand bodies; each returns a process exit code.
int cmd_learn(const ExperimentConfig& cfg);
int cmd_sweep(const ExperimentConfig& cfg, const std::vector<int>& budgets);
int cmd_baseline(const ExperimentConfig& cfg, const std::string& which);
int cmd_ablate(const ExperimentConfig& cfg);
int cmd_synth(const ExperimentConfig& cfg);
int cmd_report(const ExperimentConfig& cfg, const std::string& bundle_dir);

}  // namespace vsl::cli
