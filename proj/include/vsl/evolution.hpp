#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "vsl/train.hpp"

namespace vsl::evo {

// Snapshot of a candidate's quality, cached at insertion time.
struct Scores {
  std::vector<double> coherence;   // per value
  double coherence_mean = 0.0;
  double repr = 0.0;
  std::optional<double> conc;      // absent with one populated cluster
  std::optional<double> dunn;      // absent iff conc absent; may be +inf
  int populated = 1;
};

Scores compute_scores(const net::Evaluator& ev, const train::EmState& state);

struct Candidate {
  train::EmState state;
  Scores scores;
};

// Strictly-better-or-equal on (coherence, conciseness, representativeness,
// fewer populated clusters), strict somewhere. Absent conciseness is worse
// than any defined value.
bool pareto_dominates(const Scores& a, const Scores& b);

// Bounded archive of candidate solutions.
class SolutionMemory {
 public:
  explicit SolutionMemory(std::size_t capacity);

  const std::vector<Candidate>& solutions() const { return mem_; }
  std::size_t capacity() const { return cap_; }
  std::size_t size() const { return mem_.size(); }

  // Plain append used while seeding the memory; never exceeds capacity.
  void fill(Candidate c) {
    if (mem_.size() >= cap_)
      throw std::logic_error("solution memory: fill beyond capacity");
    mem_.push_back(std::move(c));
  }

  // Replaces the weakest dominated member, or appends and evicts the
  // weakest member when over capacity.
  void insert(Candidate c);

  // Rank-proportional draw: candidates sorted ascending by quality get
  // selection weight rank/sum_of_ranks.
  const Candidate& select(std::mt19937_64& rng) const;

  int best_coherence_index() const;  // first of ties
  int best_dunn_index() const;       // -1 when no candidate has a Dunn value
  int champion_index() const;        // best coherence, Dunn breaks ties

 private:
  // Worst member of `pool` (all members when empty) in elimination order;
  // protected best-coherence/best-Dunn members are skipped when asked.
  int worst_member(const std::vector<int>& pool, bool respect_protection) const;

  std::vector<Candidate> mem_;
  std::size_t cap_;
};

struct MutationConfig {
  double p_move = 0.1;   // per-agent move probability when adding a cluster
  double strength = 0.25;
};

// Structural mutation (remove a populated cluster or open an empty slot)
// followed by Gaussian parameter noise scaled by the candidate's quality
// gap. best_dunn is the best defined Dunn value in the memory.
train::EmState mutate(const train::EmState& state, const Scores& scores,
                      const MutationConfig& cfg,
                      std::optional<double> best_dunn, std::mt19937_64& rng);

struct SearchConfig {
  train::TrainConfig em;
  int steps = 200;          // outer iterations
  int memory_size = 5;
  double eps_mutate = 0.2;  // probability a selected candidate is mutated
  MutationConfig mutation;
  std::uint64_t seed = 26;

  void validate() const;
};

struct StepRow {
  int step = 0;
  std::vector<double> coherence;  // champion's
  double coherence_mean = 0.0;
  double repr = 0.0;
  std::optional<double> conc, dunn;
  int populated = 1;
  int memory_size = 0;
};

struct SearchResult {
  Candidate champion;
  std::vector<Candidate> memory;
  train::CoherenceBest coherence_best;
};

SearchResult run_search(const SearchConfig& cfg, const ValueSystemDataset& vs,
                        const GroundingDataset& grounding,
                        std::vector<StepRow>* telemetry = nullptr);

}  // namespace vsl::evo
