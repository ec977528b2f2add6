#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ref {

namespace {

constexpr double kEps = 1e-12;

double xlogx_ratio(double a, double b) {
  // a * log(a / b) with the 0 log 0 convention
  if (a == 0.0) return 0.0;
  return a * std::log(a / b);
}

double kl(double p, double q) {
  return xlogx_ratio(p, q) + xlogx_ratio(1.0 - p, 1.0 - q);
}

}  // namespace

double bt(double left, double right) {
  if (!std::isfinite(left) || !std::isfinite(right))
    throw std::domain_error("bt: non-finite alignment value");
  const double m = std::max(left, right);
  const double el = std::exp(left - m);
  const double er = std::exp(right - m);
  return el / (el + er);
}

int delta(double p, double q) {
  if (p > 0.5 && q > 0.5) return 0;
  if (p < 0.5 && q < 0.5) return 0;
  if (p == 0.5 && q == 0.5) return 0;
  return 1;
}

double jsd(double p, double q) {
  const double m = 0.5 * (p + q);
  return 0.5 * (kl(p, m) + kl(q, m));
}

double cross_entropy(double p, double y) {
  p = std::min(std::max(p, kEps), 1.0 - kEps);
  double ce = 0.0;
  if (y > 0.0) ce -= y * std::log(p);
  if (y < 1.0) ce -= (1.0 - y) * std::log(1.0 - p);
  return ce;
}

double mlp_forward(const std::vector<int>& sizes,
                   const std::vector<double>& params,
                   const std::vector<double>& x) {
  if (sizes.size() < 2 || x.size() != static_cast<std::size_t>(sizes.front()))
    throw std::invalid_argument("mlp_forward: shape mismatch");
  std::vector<double> h = x;
  std::size_t off = 0;
  for (std::size_t layer = 0; layer + 1 < sizes.size(); ++layer) {
    const int nin = sizes[layer];
    const int nout = sizes[layer + 1];
    std::vector<double> z(static_cast<std::size_t>(nout));
    for (int o = 0; o < nout; ++o) {
      double s = 0.0;
      for (int i = 0; i < nin; ++i)
        s += params[off + static_cast<std::size_t>(o) * nin + i] *
             h[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] =
          s + params[off + static_cast<std::size_t>(nin) * nout + o];
    }
    off += static_cast<std::size_t>(nin) * nout + nout;
    const bool last = layer + 2 == sizes.size();
    if (last) return -std::log1p(std::exp(z[0]));
    for (double& v : z) v = std::tanh(v);
    h = std::move(z);
  }
  throw std::logic_error("mlp_forward: unreachable");
}

std::vector<double> softmax(const std::vector<double>& omega) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : omega) m = std::max(m, v);
  std::vector<double> out(omega.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    out[i] = std::exp(omega[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

Tables build_tables(const std::vector<std::vector<int>>& net_sizes,
                    const std::vector<std::vector<double>>& net_params,
                    const std::vector<std::vector<double>>& omegas,
                    const vsl::ValueSystemDataset& vs) {
  const auto& entities = *vs.entities;
  const std::size_t e_count = entities.size();
  const std::size_t values = net_sizes.size();
  Tables t;
  t.align.assign(values, std::vector<double>(e_count, 0.0));
  for (std::size_t i = 0; i < values; ++i)
    for (std::size_t e = 0; e < e_count; ++e)
      t.align[i][e] =
          mlp_forward(net_sizes[i], net_params[i], entities[e].features);
  t.util.assign(omegas.size(), std::vector<double>(e_count, 0.0));
  for (std::size_t l = 0; l < omegas.size(); ++l) {
    const std::vector<double> w = softmax(omegas[l]);
    for (std::size_t e = 0; e < e_count; ++e) {
      double u = 0.0;
      for (std::size_t i = 0; i < values; ++i) u += w[i] * t.align[i][e];
      t.util[l][e] = u;
    }
  }
  return t;
}

namespace {

// mean disagreement of one agent's records against a utility row
double agent_delta(const std::vector<double>& util,
                   const vsl::AgentDataset& agent) {
  double sum = 0.0;
  for (const auto& r : agent.records)
    sum += delta(bt(util[r.left], util[r.right]), r.label);
  return sum / static_cast<double>(agent.records.size());
}

double agent_ce(const std::vector<double>& util,
                const vsl::AgentDataset& agent) {
  double sum = 0.0;
  for (const auto& r : agent.records)
    sum += cross_entropy(bt(util[r.left], util[r.right]), r.label);
  return sum;
}

std::vector<int> populated_of(const std::vector<int>& beta, int l_max) {
  std::vector<bool> seen(static_cast<std::size_t>(l_max), false);
  for (int c : beta) seen[static_cast<std::size_t>(c)] = true;
  std::vector<int> out;
  for (int l = 0; l < l_max; ++l)
    if (seen[static_cast<std::size_t>(l)]) out.push_back(l);
  return out;
}

// union-mean of a per-agent statistic over two clusters' members
template <typename F>
double union_mean(const std::vector<int>& beta, int a, int b,
                  const vsl::ValueSystemDataset& vs, F&& per_agent) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t j = 0; j < vs.agents.size(); ++j) {
    if (beta[j] != a && beta[j] != b) continue;
    sum += per_agent(vs.agents[j]);
    ++n;
  }
  return sum / static_cast<double>(n);
}

}  // namespace

double discordance(const std::vector<double>& util,
                   const vsl::AgentDataset& agent) {
  return agent_delta(util, agent);
}

double inter_cluster(const std::vector<double>& util_a,
                     const std::vector<double>& util_b,
                     const std::vector<const vsl::AgentDataset*>& agents) {
  double sum = 0.0;
  for (const vsl::AgentDataset* agent : agents) {
    double s = 0.0;
    for (const auto& r : agent->records)
      s += delta(bt(util_a[r.left], util_a[r.right]),
                 bt(util_b[r.left], util_b[r.right]));
    sum += s / static_cast<double>(agent->records.size());
  }
  return sum / static_cast<double>(agents.size());
}

double dunn(double repr, double conc) {
  if (conc == 0.0) return 0.0;
  if (repr >= 1.0) return std::numeric_limits<double>::infinity();
  return conc / (1.0 - repr);
}

double representativeness(const Tables& t, const std::vector<int>& beta,
                          const vsl::ValueSystemDataset& vs) {
  double sum = 0.0;
  for (std::size_t j = 0; j < vs.agents.size(); ++j)
    sum += agent_delta(t.util[static_cast<std::size_t>(beta[j])],
                       vs.agents[j]);
  return 1.0 - sum / static_cast<double>(vs.agents.size());
}

std::optional<double> conciseness_metric(const Tables& t,
                                         const std::vector<int>& beta,
                                         int l_max,
                                         const vsl::ValueSystemDataset& vs) {
  const std::vector<int> pop = populated_of(beta, l_max);
  if (pop.size() < 2) return std::nullopt;
  std::optional<double> best;
  for (std::size_t a = 0; a < pop.size(); ++a) {
    for (std::size_t b = a + 1; b < pop.size(); ++b) {
      const auto& ua = t.util[static_cast<std::size_t>(pop[a])];
      const auto& ub = t.util[static_cast<std::size_t>(pop[b])];
      const double d = union_mean(
          beta, pop[a], pop[b], vs, [&](const vsl::AgentDataset& agent) {
            double s = 0.0;
            for (const auto& r : agent.records)
              s += delta(bt(ua[r.left], ua[r.right]),
                         bt(ub[r.left], ub[r.right]));
            return s / static_cast<double>(agent.records.size());
          });
      if (!best || d < *best) best = d;
    }
  }
  return best;
}

std::vector<double> coherence(const Tables& t,
                              const vsl::GroundingDataset& gr) {
  std::vector<double> out(t.align.size(), 0.0);
  for (std::size_t i = 0; i < t.align.size(); ++i) {
    double sum = 0.0;
    for (const auto& agent : gr.per_value[i])
      sum += agent_delta(t.align[i], agent);
    out[i] = 1.0 - sum / static_cast<double>(gr.per_value[i].size());
  }
  return out;
}

double loss_repr(const Tables& t, const std::vector<int>& beta,
                 const vsl::ValueSystemDataset& vs) {
  double sum = 0.0;
  for (std::size_t j = 0; j < vs.agents.size(); ++j)
    sum += agent_ce(t.util[static_cast<std::size_t>(beta[j])], vs.agents[j]) /
           static_cast<double>(vs.agents[j].records.size());
  return sum / static_cast<double>(vs.agents.size());
}

std::optional<double> loss_conc(const Tables& t, const std::vector<int>& beta,
                                int l_max, const vsl::ValueSystemDataset& vs) {
  const std::vector<int> pop = populated_of(beta, l_max);
  if (pop.size() < 2) return std::nullopt;
  std::optional<double> best;
  for (std::size_t a = 0; a < pop.size(); ++a) {
    for (std::size_t b = a + 1; b < pop.size(); ++b) {
      const auto& ua = t.util[static_cast<std::size_t>(pop[a])];
      const auto& ub = t.util[static_cast<std::size_t>(pop[b])];
      const double d = union_mean(
          beta, pop[a], pop[b], vs, [&](const vsl::AgentDataset& agent) {
            double s = 0.0;
            for (const auto& r : agent.records)
              s += jsd(bt(ua[r.left], ua[r.right]),
                       bt(ub[r.left], ub[r.right]));
            return s / static_cast<double>(agent.records.size());
          });
      if (!best || d < *best) best = d;
    }
  }
  return best;
}

std::vector<double> loss_grounding(const Tables& t,
                                   const vsl::GroundingDataset& gr) {
  std::vector<double> out(t.align.size(), 0.0);
  for (std::size_t i = 0; i < t.align.size(); ++i) {
    double sum = 0.0;
    for (const auto& agent : gr.per_value[i])
      sum += agent_ce(t.align[i], agent) /
             static_cast<double>(agent.records.size());
    out[i] = sum / static_cast<double>(gr.per_value[i].size());
  }
  return out;
}

double total_loss(const Tables& t, const std::vector<int>& beta, int l_max,
                  const std::vector<double>& lambda, bool use_repr,
                  bool use_conc, const vsl::ValueSystemDataset& vs,
                  const vsl::GroundingDataset& gr) {
  double total = 0.0;
  if (use_repr) total += loss_repr(t, beta, vs);
  if (use_conc) {
    const std::optional<double> lc = loss_conc(t, beta, l_max, vs);
    if (lc) total -= *lc;
  }
  if (!lambda.empty()) {
    const std::vector<double> lv = loss_grounding(t, gr);
    for (std::size_t i = 0; i < lv.size(); ++i) total += lambda[i] * lv[i];
  }
  return total;
}

}  // namespace ref
