#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vsl/dataset.hpp"
#include "vsl/metrics.hpp"

// Random fixture builders shared by the test files.
namespace fixtures {

inline vsl::EntityTablePtr make_entities(int count, int dim,
                                         std::uint64_t seed) {
  auto table = std::make_shared<vsl::EntityTable>();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int e = 0; e < count; ++e) {
    vsl::Entity ent;
    for (int d = 0; d < dim; ++d) ent.features.push_back(u(rng));
    table->push_back(std::move(ent));
  }
  return table;
}

inline std::vector<vsl::PreferenceRecord> random_records(
    int count, std::uint32_t entity_count, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(0, entity_count - 1);
  std::uniform_int_distribution<int> lab(0, 3);
  std::vector<vsl::PreferenceRecord> out;
  for (int r = 0; r < count; ++r) {
    vsl::PreferenceRecord rec;
    rec.left = pick(rng);
    do {
      rec.right = pick(rng);
    } while (rec.right == rec.left);
    const int l = lab(rng);
    rec.label = l == 0 ? 0.0 : (l == 1 ? 0.5 : 1.0);
    out.push_back(rec);
  }
  return out;
}

inline vsl::ValueSystemDataset random_vs(int agents, int entities, int dim,
                                         int min_records, int max_records,
                                         std::uint64_t seed) {
  vsl::ValueSystemDataset vs;
  vs.entities = make_entities(entities, dim, seed);
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::uniform_int_distribution<int> nrec(min_records, max_records);
  for (int j = 0; j < agents; ++j) {
    vsl::AgentDataset a;
    a.agent_id = "a" + std::to_string(j);
    a.records = random_records(nrec(rng), static_cast<std::uint32_t>(entities),
                               rng);
    vs.agents.push_back(std::move(a));
  }
  return vs;
}

// Grounding data over the same entity table; every value keeps all agents.
inline vsl::GroundingDataset random_grounding(const vsl::ValueSystemDataset& vs,
                                              int values, int min_records,
                                              int max_records,
                                              std::uint64_t seed) {
  vsl::GroundingDataset gr;
  gr.entities = vs.entities;
  std::mt19937_64 rng(seed ^ 0x9abcULL);
  std::uniform_int_distribution<int> nrec(min_records, max_records);
  const auto entities = static_cast<std::uint32_t>(vs.entities->size());
  for (int i = 0; i < values; ++i) {
    gr.value_names.push_back("v" + std::to_string(i + 1));
    std::vector<vsl::AgentDataset> agents;
    for (const auto& a : vs.agents) {
      vsl::AgentDataset g;
      g.agent_id = a.agent_id;
      g.records = random_records(nrec(rng), entities, rng);
      agents.push_back(std::move(g));
    }
    gr.per_value.push_back(std::move(agents));
  }
  return gr;
}

// Random utility tables (cluster x entity) and an assignment covering
// every populated slot.
inline std::vector<std::vector<double>> random_tables(int rows, int entities,
                                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<std::vector<double>> t(static_cast<std::size_t>(rows));
  for (auto& row : t) {
    row.resize(static_cast<std::size_t>(entities));
    for (double& v : row) v = u(rng);
  }
  return t;
}

inline vsl::metrics::Assignment random_assignment(int agents, int l_max,
                                                  std::mt19937_64& rng) {
  vsl::metrics::Assignment a;
  a.l_max = l_max;
  std::uniform_int_distribution<int> pick(0, l_max - 1);
  a.cluster_of.resize(static_cast<std::size_t>(agents));
  for (int j = 0; j < agents; ++j) a.cluster_of[static_cast<std::size_t>(j)] = pick(rng);
  return a;
}

inline vsl::metrics::AlignFn table_fn(const std::vector<double>& row) {
  return [&row](std::uint32_t e) { return row[e]; };
}

}  // namespace fixtures
