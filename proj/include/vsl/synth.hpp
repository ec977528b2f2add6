#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vsl/dataset.hpp"
#include "vsl/metrics.hpp"
#include "vsl/net.hpp"

namespace vsl::synth {

// Recipe for a society with planted structure: linear grounding
// functions shared by everyone and one weight profile per cluster.
struct SyntheticSpec {
  int agents = 60;
  int clusters = 3;
  int values = 3;
  int dim = 4;
  int pairs_per_agent = 40;
  double noise = 0.0;   // per-record label flip probability, < 0.5
  double margin = 0.05; // minimum alignment and utility gap inside a pair
  double jitter = 0.0;  // intra-cluster weight spread, [0, 1): each agent
                        // blends its cluster profile with its own simplex draw
  std::vector<std::vector<double>> weights;  // clusters x values; default
                                             // profiles when empty
  std::uint64_t seed = 1;

  void validate() const;
};

// Dominant weight 0.8 on value k % values, remainder spread evenly.
std::vector<std::vector<double>> default_weights(int clusters, int values);

struct Society {
  ValueSystemDataset vs;
  GroundingDataset grounding;
  metrics::Assignment truth;                       // agents -> clusters
  std::vector<std::vector<double>> weights;        // planted, clusters x values
  std::vector<std::vector<double>> agent_weights;  // agents x values; equals
                                                   // the cluster row at jitter 0
  std::vector<std::vector<double>> coeffs;         // values x dim, alignment
                                                   // A_i(x) = -(coeffs_i . x)
  std::vector<RawInstance> raw;                    // CSV export form (dim 4)

  double planted_alignment(int value, const Entity& e) const;
  double planted_utility(int cluster, const Entity& e) const;
  double agent_utility(int agent, const Entity& e) const;  // labels come
                                                           // from this one
};

// Entity pairs are redrawn until every value alignment and the agent's
// own utility separate them by a clear margin, so noiseless labels are
// exactly realizable by the planted functions.
Society generate_society(const SyntheticSpec& spec);

// All weight vectors on the simplex grid (multiples of 1/resolution)
// whose linear utility sum_i w_i * values[e][i] reproduces the strict
// ranking (best first). Empty means no grid point realizes it.
std::vector<std::vector<double>> linear_feasibility_scan(
    const std::vector<std::vector<double>>& entity_values,
    const std::vector<int>& ranking, int resolution);

// Single shared Bradley-Terry utility fitted to the pooled records of
// the whole society, ignoring agent identity.
struct FlatBtConfig {
  int steps = 2000;
  double lr = 0.05;
  std::uint64_t seed = 0;
};

struct FlatBtResult {
  net::Mlp model;
  double loss = 0.0;               // pooled cross-entropy at the end
  double repr = 0.0;               // agent-normalized disagreement metric
  std::vector<double> coherence;   // of the single utility per value
};

FlatBtResult baseline_flat_bt(const ValueSystemDataset& vs,
                              const GroundingDataset& grounding,
                              const FlatBtConfig& cfg);

// Two-stage pipeline: grounding functions fitted alone, then frozen
// while a single weight vector is fitted to the society.
struct SequentialConfig {
  int grounding_steps = 2000;
  int weight_steps = 2000;
  double alpha_theta = 0.005;
  double alpha_omega = 0.01;
  std::uint64_t seed = 0;
};

struct SequentialResult {
  net::GroundingParams theta;
  std::vector<double> omega;
  double repr = 0.0;
  std::vector<double> coherence;
};

SequentialResult baseline_sequential(const ValueSystemDataset& vs,
                                     const GroundingDataset& grounding,
                                     const SequentialConfig& cfg);

}  // namespace vsl::synth
