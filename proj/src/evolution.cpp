#include "vsl/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "vsl/errors.hpp"
#include "vsl/rng.hpp"

namespace vsl::evo {

namespace {

// Champion order: higher mean coherence, then a defined and higher Dunn,
// then higher representativeness. Returns true when a beats b.
bool champion_better(const Scores& a, const Scores& b) {
  if (a.coherence_mean != b.coherence_mean)
    return a.coherence_mean > b.coherence_mean;
  if (a.dunn.has_value() != b.dunn.has_value()) return a.dunn.has_value();
  if (a.dunn && b.dunn && *a.dunn != *b.dunn) return *a.dunn > *b.dunn;
  return a.repr > b.repr;
}

}  // namespace

Scores compute_scores(const net::Evaluator& ev, const train::EmState& state) {
  const auto res =
      ev.evaluate(state.omegas, state.beta, {true, true, state.lambda});
  if (res.coherence.empty())
    throw std::logic_error("compute_scores: evaluator has no grounding data");
  Scores s;
  s.coherence = res.coherence;
  s.coherence_mean =
      std::accumulate(s.coherence.begin(), s.coherence.end(), 0.0) /
      static_cast<double>(s.coherence.size());
  s.repr = res.repr_metric;
  s.conc = res.conc_metric;
  if (s.conc) s.dunn = metrics::dunn_index(s.repr, *s.conc);
  s.populated = state.beta.populated_count();
  return s;
}

bool pareto_dominates(const Scores& a, const Scores& b) {
  const double ac = a.conc.value_or(-std::numeric_limits<double>::infinity());
  const double bc = b.conc.value_or(-std::numeric_limits<double>::infinity());
  const bool ge = a.coherence_mean >= b.coherence_mean && ac >= bc &&
                  a.repr >= b.repr && a.populated <= b.populated;
  if (!ge) return false;
  return a.coherence_mean > b.coherence_mean || ac > bc || a.repr > b.repr ||
         a.populated < b.populated;
}

SolutionMemory::SolutionMemory(std::size_t capacity) : cap_(capacity) {
  if (capacity < 1)
    throw std::invalid_argument("solution memory: capacity must be >= 1");
}

int SolutionMemory::best_coherence_index() const {
  int best = -1;
  for (std::size_t i = 0; i < mem_.size(); ++i)
    if (best < 0 || mem_[i].scores.coherence_mean >
                        mem_[static_cast<std::size_t>(best)].scores.coherence_mean)
      best = static_cast<int>(i);
  return best;
}

int SolutionMemory::best_dunn_index() const {
  int best = -1;
  for (std::size_t i = 0; i < mem_.size(); ++i) {
    if (!mem_[i].scores.dunn) continue;
    if (best < 0 ||
        *mem_[i].scores.dunn > *mem_[static_cast<std::size_t>(best)].scores.dunn)
      best = static_cast<int>(i);
  }
  return best;
}

int SolutionMemory::champion_index() const {
  int best = -1;
  for (std::size_t i = 0; i < mem_.size(); ++i)
    if (best < 0 || champion_better(mem_[i].scores,
                                    mem_[static_cast<std::size_t>(best)].scores))
      best = static_cast<int>(i);
  return best;
}

int SolutionMemory::worst_member(const std::vector<int>& pool,
                                 bool respect_protection) const {
  const int n = static_cast<int>(mem_.size());

  // agreement with the most similar other member, counted over agents
  std::vector<int> overlap(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const auto& bi = mem_[static_cast<std::size_t>(i)].state.beta.cluster_of;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      const auto& bk = mem_[static_cast<std::size_t>(k)].state.beta.cluster_of;
      int agree = 0;
      for (std::size_t j = 0; j < bi.size() && j < bk.size(); ++j)
        if (bi[j] == bk[j]) ++agree;
      overlap[static_cast<std::size_t>(i)] =
          std::max(overlap[static_cast<std::size_t>(i)], agree);
    }
  }
  std::vector<int> dominated_by(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (k != i && pareto_dominates(mem_[static_cast<std::size_t>(k)].scores,
                                     mem_[static_cast<std::size_t>(i)].scores))
        ++dominated_by[static_cast<std::size_t>(i)];

  // worse-than order: more populated clusters, then more redundancy with
  // the rest of the memory, then more dominators, then lower coherence,
  // then lower (or absent) Dunn
  auto worse = [&](int a, int b) {
    const auto& sa = mem_[static_cast<std::size_t>(a)].scores;
    const auto& sb = mem_[static_cast<std::size_t>(b)].scores;
    if (sa.populated != sb.populated) return sa.populated > sb.populated;
    if (overlap[static_cast<std::size_t>(a)] != overlap[static_cast<std::size_t>(b)])
      return overlap[static_cast<std::size_t>(a)] > overlap[static_cast<std::size_t>(b)];
    if (dominated_by[static_cast<std::size_t>(a)] !=
        dominated_by[static_cast<std::size_t>(b)])
      return dominated_by[static_cast<std::size_t>(a)] >
             dominated_by[static_cast<std::size_t>(b)];
    if (sa.coherence_mean != sb.coherence_mean)
      return sa.coherence_mean < sb.coherence_mean;
    if (sa.dunn.has_value() != sb.dunn.has_value()) return !sa.dunn.has_value();
    if (sa.dunn && sb.dunn && *sa.dunn != *sb.dunn) return *sa.dunn < *sb.dunn;
    return false;
  };

  const int prot_c = respect_protection ? best_coherence_index() : -1;
  const int prot_d = respect_protection ? best_dunn_index() : -1;

  std::vector<int> candidates = pool;
  if (candidates.empty()) {
    candidates.resize(static_cast<std::size_t>(n));
    std::iota(candidates.begin(), candidates.end(), 0);
  }
  int worst = -1;
  for (int i : candidates) {
    if (i == prot_c || i == prot_d) continue;
    if (worst < 0 || worse(i, worst)) worst = i;
  }
  if (worst < 0 && !candidates.empty()) {
    // every candidate is protected; coherence protection takes precedence,
    // so the best-Dunn member is the one that may go
    for (int i : candidates)
      if (i != prot_c && (worst < 0 || worse(i, worst))) worst = i;
  }
  return worst;
}

void SolutionMemory::insert(Candidate c) {
  std::vector<int> dominated;
  for (std::size_t i = 0; i < mem_.size(); ++i)
    if (pareto_dominates(c.scores, mem_[i].scores))
      dominated.push_back(static_cast<int>(i));

  if (!dominated.empty()) {
    const int victim = worst_member(dominated, false);
    mem_[static_cast<std::size_t>(victim)] = std::move(c);
    return;
  }
  mem_.push_back(std::move(c));
  if (mem_.size() > cap_) {
    const int victim = worst_member({}, true);
    mem_.erase(mem_.begin() + victim);
  }
}

const Candidate& SolutionMemory::select(std::mt19937_64& rng) const {
  if (mem_.empty()) throw std::logic_error("select: empty memory");

  // ascending quality; selection probability of the i-th (1-based) of n
  // sorted candidates is i / (n(n+1)/2)
  std::vector<int> order(mem_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return champion_better(mem_[static_cast<std::size_t>(b)].scores,
                           mem_[static_cast<std::size_t>(a)].scores);
  });

  const std::size_t n = mem_.size();
  const double total = static_cast<double>(n * (n + 1)) / 2.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double roll = u(rng) * total;
  for (std::size_t r = 0; r < n; ++r) {
    roll -= static_cast<double>(r + 1);
    if (roll < 0.0) return mem_[static_cast<std::size_t>(order[r])];
  }
  return mem_[static_cast<std::size_t>(order[n - 1])];
}

train::EmState mutate(const train::EmState& state, const Scores& scores,
                      const MutationConfig& cfg,
                      std::optional<double> best_dunn, std::mt19937_64& rng) {
  train::EmState out = state;
  const int l_max = out.beta.l_max;
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // structural move: drop a populated cluster or open an empty slot; when
  // the drawn branch cannot apply, the other one fires
  const auto pops = out.beta.populated();
  const bool can_remove = pops.size() >= 2;
  const bool can_add = static_cast<int>(pops.size()) < l_max;
  bool remove = u(rng) < 0.5;
  if (remove && !can_remove) remove = false;
  if (!remove && !can_add) remove = can_remove;

  if (remove && can_remove) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(pops.size()) - 1);
    const int victim = pops[static_cast<std::size_t>(pick(rng))];
    std::vector<int> rest;
    for (int l : pops)
      if (l != victim) rest.push_back(l);
    std::uniform_int_distribution<int> target(0, static_cast<int>(rest.size()) - 1);
    for (auto& cl : out.beta.cluster_of)
      if (cl == victim) cl = rest[static_cast<std::size_t>(target(rng))];
  } else if (!remove && can_add) {
    int slot = -1;
    std::vector<bool> used(static_cast<std::size_t>(l_max), false);
    for (int l : pops) used[static_cast<std::size_t>(l)] = true;
    for (int l = 0; l < l_max; ++l)
      if (!used[static_cast<std::size_t>(l)]) {
        slot = l;
        break;
      }
    for (auto& cl : out.beta.cluster_of)
      if (u(rng) < cfg.p_move) cl = slot;
  }

  // parameter noise scaled by how far the candidate sits from perfect
  // coherence and from the memory's best Dunn value
  const double sd_theta = cfg.strength * (1.0 - scores.coherence_mean);
  if (sd_theta > 0.0) {
    std::normal_distribution<double> noise(0.0, sd_theta);
    for (auto& nn : out.theta.nets)
      for (auto& p : nn.params) p += noise(rng);
  }

  double dunn_error = 1.0;
  if (scores.dunn && best_dunn) {
    if (*scores.dunn >= *best_dunn) {
      dunn_error = 0.0;
    } else if (std::isinf(*best_dunn) || *best_dunn <= 0.0) {
      dunn_error = 1.0;
    } else {
      dunn_error = std::clamp(1.0 - *scores.dunn / *best_dunn, 0.0, 1.0);
    }
  }
  const double sd_omega = cfg.strength * dunn_error;
  if (sd_omega > 0.0) {
    std::normal_distribution<double> noise(0.0, sd_omega);
    for (auto& o : out.omegas)
      for (auto& w : o) w += noise(rng);
  }
  return out;
}

void SearchConfig::validate() const {
  em.validate();
  if (steps < 0) throw ConfigError("search steps must be >= 0");
  if (memory_size < 1) throw ConfigError("memory size must be >= 1");
  if (eps_mutate < 0 || eps_mutate > 1)
    throw ConfigError("mutation probability must be in [0, 1]");
  if (mutation.p_move < 0 || mutation.p_move > 1)
    throw ConfigError("p_move must be in [0, 1]");
  if (mutation.strength < 0) throw ConfigError("mutation strength must be >= 0");
}

SearchResult run_search(const SearchConfig& cfg, const ValueSystemDataset& vs,
                        const GroundingDataset& grounding,
                        std::vector<StepRow>* telemetry) {
  cfg.validate();
  net::Evaluator ev(vs, grounding);
  const int values = grounding.value_count();

  train::CoherenceBest best(static_cast<std::size_t>(values), 0.0);
  SolutionMemory memory(static_cast<std::size_t>(cfg.memory_size));

  for (int k = 0; k < cfg.memory_size; ++k) {
    auto rng = rng::stream(cfg.seed, "memory-fill", static_cast<std::uint64_t>(k));
    Candidate cand;
    cand.state = train::init_state(cfg.em.l_max, values, vs.feature_dim(),
                                   vs.agent_count(), cfg.em.lambda0, rng);
    ev.set_parameters(cand.state.theta);
    cand.scores = compute_scores(ev, cand.state);
    memory.fill(std::move(cand));
  }

  for (int t = 0; t < cfg.steps; ++t) {
    auto rng = rng::stream(cfg.seed, "step", static_cast<std::uint64_t>(t));
    Candidate cand = memory.select(rng);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < cfg.eps_mutate) {
      std::optional<double> bd;
      const int bdi = memory.best_dunn_index();
      if (bdi >= 0)
        bd = memory.solutions()[static_cast<std::size_t>(bdi)].scores.dunn;
      cand.state = mutate(cand.state, cand.scores, cfg.mutation, bd, rng);
    }

    train::run_em(ev, cand.state, best, cfg.em, true);
    cand.scores = compute_scores(ev, cand.state);
    memory.insert(std::move(cand));

    if (telemetry) {
      const auto& champ =
          memory.solutions()[static_cast<std::size_t>(memory.champion_index())];
      StepRow row;
      row.step = t;
      row.coherence = champ.scores.coherence;
      row.coherence_mean = champ.scores.coherence_mean;
      row.repr = champ.scores.repr;
      row.conc = champ.scores.conc;
      row.dunn = champ.scores.dunn;
      row.populated = champ.scores.populated;
      row.memory_size = static_cast<int>(memory.size());
      telemetry->push_back(row);
    }
  }

  SearchResult res;
  res.memory = memory.solutions();
  res.champion = res.memory[static_cast<std::size_t>(memory.champion_index())];
  res.coherence_best = best;
  return res;
}

}  // namespace vsl::evo
