#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsl/dataset.hpp"
#include "vsl/metrics.hpp"

namespace vsl::report {

struct ClusterRow {
  int cluster = 0;
  int size = 0;
  std::vector<double> weights;  // simplex weights over values
  double repr = 0.0;            // 1 - mean member discordance
};

// Socio-demographic profile of one cluster: per-feature mean and percent
// deviation from the society mean (absent when that mean is zero).
struct ContextRow {
  int cluster = 0;
  std::array<double, kContextFeatures> mean{};
  std::array<std::optional<double>, kContextFeatures> deviation_pct{};
};

struct ClusterReport {
  std::vector<std::string> value_names;
  std::vector<ClusterRow> clusters;  // populated clusters, ascending id
  double repr = 0.0;
  std::optional<double> conc;
  std::optional<double> dunn;  // may be +infinity
  std::vector<double> coherence;
  double coherence_mean = 0.0;
  bool has_context = false;
  std::array<double, kContextFeatures> society_mean{};
  std::vector<ContextRow> context;

  std::string to_table() const;
  std::string to_json() const;  // sorted keys; infinite Dunn becomes "inf"
};

// Scores a solution: cluster_utils and value_aligns must cover every
// slot/value; contexts may be null.
ClusterReport build_cluster_report(
    const std::vector<std::vector<double>>& cluster_weights,
    const metrics::Assignment& beta,
    std::span<const metrics::AlignFn> cluster_utils,
    std::span<const metrics::AlignFn> value_aligns,
    const ValueSystemDataset& vs, const GroundingDataset& grounding,
    const std::vector<AgentContext>* contexts);

}  // namespace vsl::report
