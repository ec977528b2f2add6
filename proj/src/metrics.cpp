#include "vsl/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "vsl/prefmodel.hpp"

namespace vsl::metrics {

std::vector<int> Assignment::sizes() const {
  std::vector<int> s(static_cast<std::size_t>(l_max), 0);
  for (int c : cluster_of) ++s[static_cast<std::size_t>(c)];
  return s;
}

std::vector<int> Assignment::populated() const {
  const auto s = sizes();
  std::vector<int> out;
  for (int l = 0; l < l_max; ++l)
    if (s[static_cast<std::size_t>(l)] > 0) out.push_back(l);
  return out;
}

int Assignment::populated_count() const {
  return static_cast<int>(populated().size());
}

void Assignment::validate() const {
  if (l_max < 1) throw std::invalid_argument("assignment: l_max must be >= 1");
  if (cluster_of.empty())
    throw std::invalid_argument("assignment: no agents");
  for (int c : cluster_of)
    if (c < 0 || c >= l_max)
      throw std::invalid_argument("assignment: cluster id out of range");
}

double discordance_agent(const AlignFn& utility, const AgentDataset& agent) {
  if (agent.records.empty())
    throw std::invalid_argument("discordance_agent: agent has no records");
  double sum = 0.0;
  for (const auto& r : agent.records) {
    const double p = pref::bradley_terry(utility(r.left), utility(r.right));
    sum += pref::delta(p, r.label);
  }
  return sum / static_cast<double>(agent.records.size());
}

double coherence_value(const AlignFn& alignment,
                       const std::vector<AgentDataset>& agents) {
  if (agents.empty())
    throw std::invalid_argument("coherence_value: no agents");
  double sum = 0.0;
  for (const auto& a : agents) sum += discordance_agent(alignment, a);
  return 1.0 - sum / static_cast<double>(agents.size());
}

std::vector<double> coherence_grounding(std::span<const AlignFn> alignments,
                                        const GroundingDataset& grounding) {
  if (static_cast<int>(alignments.size()) != grounding.value_count())
    throw std::invalid_argument("coherence_grounding: value count mismatch");
  std::vector<double> out(alignments.size());
  for (std::size_t i = 0; i < alignments.size(); ++i)
    out[i] = coherence_value(alignments[i], grounding.per_value[i]);
  return out;
}

double representativeness(std::span<const AlignFn> cluster_utils,
                          const Assignment& assignment,
                          const ValueSystemDataset& vs) {
  assignment.validate();
  if (assignment.agent_count() != vs.agent_count())
    throw std::invalid_argument("representativeness: agent count mismatch");
  if (static_cast<int>(cluster_utils.size()) < assignment.l_max)
    throw std::invalid_argument("representativeness: missing cluster utility");
  double sum = 0.0;
  for (int j = 0; j < vs.agent_count(); ++j) {
    const int l = assignment.cluster_of[static_cast<std::size_t>(j)];
    sum += discordance_agent(cluster_utils[static_cast<std::size_t>(l)],
                             vs.agents[static_cast<std::size_t>(j)]);
  }
  return 1.0 - sum / static_cast<double>(vs.agent_count());
}

double inter_cluster_discordance(const AlignFn& u_a, const AlignFn& u_b,
                                 std::span<const AgentDataset* const> agents) {
  if (agents.empty())
    throw std::invalid_argument("inter_cluster_discordance: no agents");
  double sum = 0.0;
  for (const AgentDataset* agent : agents) {
    if (agent->records.empty())
      throw std::invalid_argument("inter_cluster_discordance: empty agent");
    double inner = 0.0;
    for (const auto& r : agent->records) {
      const double pa = pref::bradley_terry(u_a(r.left), u_a(r.right));
      const double pb = pref::bradley_terry(u_b(r.left), u_b(r.right));
      inner += pref::delta(pa, pb);
    }
    sum += inner / static_cast<double>(agent->records.size());
  }
  return sum / static_cast<double>(agents.size());
}

std::optional<double> conciseness(std::span<const AlignFn> cluster_utils,
                                  const Assignment& assignment,
                                  const ValueSystemDataset& vs) {
  assignment.validate();
  const auto pop = assignment.populated();
  if (pop.size() < 2) return std::nullopt;

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < pop.size(); ++a) {
    for (std::size_t b = 0; b < pop.size(); ++b) {
      if (a == b) continue;
      std::vector<const AgentDataset*> members;
      for (int j = 0; j < vs.agent_count(); ++j) {
        const int l = assignment.cluster_of[static_cast<std::size_t>(j)];
        if (l == pop[a] || l == pop[b])
          members.push_back(&vs.agents[static_cast<std::size_t>(j)]);
      }
      const double d = inter_cluster_discordance(
          cluster_utils[static_cast<std::size_t>(pop[a])],
          cluster_utils[static_cast<std::size_t>(pop[b])], members);
      best = std::min(best, d);
    }
  }
  return best;
}

double dunn_index(double representativeness, double conciseness) {
  if (conciseness == 0.0) return 0.0;
  if (representativeness >= 1.0)
    return std::numeric_limits<double>::infinity();
  return conciseness / (1.0 - representativeness);
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("adjusted_rand_index: size mismatch");
  if (a.empty()) throw std::invalid_argument("adjusted_rand_index: empty");

  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  auto comb2 = [](double n) { return n * (n - 1.0) / 2.0; };
  double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [k, n] : joint) sum_joint += comb2(n);
  for (const auto& [k, n] : ca) sum_a += comb2(n);
  for (const auto& [k, n] : cb) sum_b += comb2(n);
  const double total = comb2(static_cast<double>(a.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_joint - expected) / (max_index - expected);
}

}  // namespace vsl::metrics
