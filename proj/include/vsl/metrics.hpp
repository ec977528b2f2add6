#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vsl/dataset.hpp"

namespace vsl::metrics {

// Alignment or utility as a function of an entity index. Callers bind
// whatever model they are scoring.
using AlignFn = std::function<double(std::uint32_t)>;

// Surjective-by-construction map from agents to cluster slots.
struct Assignment {
  std::vector<int> cluster_of;  // one entry per agent, values in [0, l_max)
  int l_max = 1;

  int agent_count() const { return static_cast<int>(cluster_of.size()); }
  std::vector<int> sizes() const;
  std::vector<int> populated() const;  // ascending cluster ids with members
  int populated_count() const;
  void validate() const;  // throws std::invalid_argument on range errors
  bool operator==(const Assignment&) const = default;
};

// Fraction of an agent's comparisons where the function's preference
// disagrees with the observed label.
double discordance_agent(const AlignFn& utility, const AgentDataset& agent);

// 1 - mean over agents of their mean disagreement with the alignment
// function's induced preferences.
double coherence_value(const AlignFn& alignment,
                       const std::vector<AgentDataset>& agents);

std::vector<double> coherence_grounding(std::span<const AlignFn> alignments,
                                        const GroundingDataset& grounding);

// 1 - mean over all agents of their discordance against their own
// cluster's utility.
double representativeness(std::span<const AlignFn> cluster_utils,
                          const Assignment& assignment,
                          const ValueSystemDataset& vs);

// Mean disagreement between two utilities over the pooled data of the
// given agents, each agent's records averaged before agents are averaged.
double inter_cluster_discordance(const AlignFn& u_a, const AlignFn& u_b,
                                 std::span<const AgentDataset* const> agents);

// Minimum pairwise inter-cluster discordance over populated ordered
// pairs. Undefined (nullopt) when fewer than two clusters are populated.
std::optional<double> conciseness(std::span<const AlignFn> cluster_utils,
                                  const Assignment& assignment,
                                  const ValueSystemDataset& vs);

// conciseness / (1 - representativeness); +infinity when representativeness
// is 1 and conciseness is positive, 0 when conciseness is 0.
double dunn_index(double representativeness, double conciseness);

// Chance-adjusted agreement between two flat partitions given as per-item
// labels. Label values are arbitrary; only co-membership matters.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace vsl::metrics
