#include "vsl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vsl/errors.hpp"
#include "vsl/parallel.hpp"
#include "vsl/prefmodel.hpp"
#include "vsl/rng.hpp"

namespace vsl::synth {

void SyntheticSpec::validate() const {
  if (agents < 1) throw ConfigError("synthetic: agents must be >= 1");
  if (clusters < 1 || clusters > agents)
    throw ConfigError("synthetic: clusters must be in [1, agents]");
  if (values < 1) throw ConfigError("synthetic: values must be >= 1");
  if (dim < values)
    throw ConfigError("synthetic: dim must be >= values, every value needs "
                      "its own feature block");
  if (pairs_per_agent < 1) throw ConfigError("synthetic: pairs must be >= 1");
  if (noise < 0.0 || noise >= 0.5)
    throw ConfigError("synthetic: noise must be in [0, 0.5)");
  if (margin <= 0.0 || margin > 0.2)
    throw ConfigError("synthetic: margin must be in (0, 0.2]");
  if (jitter < 0.0 || jitter >= 1.0)
    throw ConfigError("synthetic: jitter must be in [0, 1)");
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) != clusters)
      throw ConfigError("synthetic: need one weight row per cluster");
    for (const auto& row : weights) {
      if (static_cast<int>(row.size()) != values)
        throw ConfigError("synthetic: weight row size must match values");
      double s = 0.0;
      for (double w : row) {
        if (w < 0.0) throw ConfigError("synthetic: weights must be >= 0");
        s += w;
      }
      if (std::abs(s - 1.0) > 1e-9)
        throw ConfigError("synthetic: weight rows must sum to 1");
    }
  }
}

std::vector<std::vector<double>> default_weights(int clusters, int values) {
  std::vector<std::vector<double>> w(
      static_cast<std::size_t>(clusters),
      std::vector<double>(static_cast<std::size_t>(values), 0.0));
  for (int k = 0; k < clusters; ++k) {
    if (values == 1) {
      w[static_cast<std::size_t>(k)][0] = 1.0;
      continue;
    }
    const int dom = k % values;
    const double rest = 0.2 / static_cast<double>(values - 1);
    for (int i = 0; i < values; ++i)
      w[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
          i == dom ? 0.8 : rest;
  }
  return w;
}

double Society::planted_alignment(int value, const Entity& e) const {
  const auto& c = coeffs[static_cast<std::size_t>(value)];
  double s = 0.0;
  for (std::size_t d = 0; d < c.size(); ++d) s += c[d] * e.features[d];
  return -s;
}

double Society::planted_utility(int cluster, const Entity& e) const {
  const auto& w = weights[static_cast<std::size_t>(cluster)];
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    s += w[i] * planted_alignment(static_cast<int>(i), e);
  return s;
}

double Society::agent_utility(int agent, const Entity& e) const {
  const auto& w = agent_weights[static_cast<std::size_t>(agent)];
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    s += w[i] * planted_alignment(static_cast<int>(i), e);
  return s;
}

Society generate_society(const SyntheticSpec& spec) {
  spec.validate();
  Society soc;
  soc.weights = spec.weights.empty() ? default_weights(spec.clusters, spec.values)
                                     : spec.weights;

  // planted linear alignment coefficients on disjoint feature blocks
  // (feature d belongs to value d % values), so values genuinely trade
  // off against each other and the weight profiles are identifiable
  soc.coeffs.resize(static_cast<std::size_t>(spec.values));
  for (int i = 0; i < spec.values; ++i) {
    auto rng = rng::stream(spec.seed, "coeff", static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> u(0.25, 1.0);
    auto& c = soc.coeffs[static_cast<std::size_t>(i)];
    c.assign(static_cast<std::size_t>(spec.dim), 0.0);
    for (int d = 0; d < spec.dim; ++d)
      if (d % spec.values == i) c[static_cast<std::size_t>(d)] = u(rng);
  }

  soc.truth.l_max = spec.clusters;
  soc.truth.cluster_of.resize(static_cast<std::size_t>(spec.agents));
  for (int j = 0; j < spec.agents; ++j)
    soc.truth.cluster_of[static_cast<std::size_t>(j)] = j % spec.clusters;

  // per-agent weights: the cluster profile, blended with an agent-specific
  // simplex draw when jitter is on
  soc.agent_weights.resize(static_cast<std::size_t>(spec.agents));
  for (int j = 0; j < spec.agents; ++j) {
    auto& w = soc.agent_weights[static_cast<std::size_t>(j)];
    w = soc.weights[static_cast<std::size_t>(
        soc.truth.cluster_of[static_cast<std::size_t>(j)])];
    if (spec.jitter > 0.0) {
      auto wrng = rng::stream(spec.seed, "agent-weights",
                              static_cast<std::uint64_t>(j));
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      std::vector<double> drawn(w.size());
      double total = 0.0;
      for (auto& d : drawn) {
        d = -std::log(1.0 - u01(wrng));  // Dirichlet(1) via exponentials
        total += d;
      }
      for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = (1.0 - spec.jitter) * w[i] + spec.jitter * drawn[i] / total;
    }
  }

  auto table = std::make_shared<EntityTable>();
  table->reserve(static_cast<std::size_t>(spec.agents) * spec.pairs_per_agent * 2);

  soc.vs.agents.resize(static_cast<std::size_t>(spec.agents));
  soc.grounding.per_value.resize(static_cast<std::size_t>(spec.values));
  for (int i = 0; i < spec.values; ++i) {
    soc.grounding.value_names.push_back("v" + std::to_string(i + 1));
    soc.grounding.per_value[static_cast<std::size_t>(i)].resize(
        static_cast<std::size_t>(spec.agents));
  }

  for (int j = 0; j < spec.agents; ++j) {
    const std::string id = "a" + std::to_string(j + 1);
    soc.vs.agents[static_cast<std::size_t>(j)].agent_id = id;
    for (int i = 0; i < spec.values; ++i)
      soc.grounding.per_value[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
          .agent_id = id;

    auto pair_rng =
        rng::stream(spec.seed, "pairs", static_cast<std::uint64_t>(j));
    auto noise_rng =
        rng::stream(spec.seed, "noise", static_cast<std::uint64_t>(j));
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    for (int t = 0; t < spec.pairs_per_agent; ++t) {
      Entity ea, eb;
      ea.features.resize(static_cast<std::size_t>(spec.dim));
      eb.features.resize(static_cast<std::size_t>(spec.dim));
      bool ok = false;
      for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
        for (auto& v : ea.features) v = u01(pair_rng);
        for (auto& v : eb.features) v = u01(pair_rng);
        ok = true;
        for (int i = 0; i < spec.values && ok; ++i)
          if (std::abs(soc.planted_alignment(i, ea) -
                       soc.planted_alignment(i, eb)) <= spec.margin)
            ok = false;
        if (ok && std::abs(soc.agent_utility(j, ea) -
                           soc.agent_utility(j, eb)) <= spec.margin)
          ok = false;
      }
      if (!ok)
        throw DataError("synthetic: could not separate an entity pair");

      const auto left = static_cast<std::uint32_t>(table->size());
      table->push_back(std::move(ea));
      table->push_back(std::move(eb));
      const auto right = left + 1;
      const Entity& fa = (*table)[left];
      const Entity& fb = (*table)[right];

      double label =
          soc.agent_utility(j, fa) > soc.agent_utility(j, fb) ? 1.0 : 0.0;
      if (spec.noise > 0.0 && u01(noise_rng) < spec.noise) label = 1.0 - label;
      soc.vs.agents[static_cast<std::size_t>(j)].records.push_back(
          {left, right, label});

      for (int i = 0; i < spec.values; ++i) {
        const double gl =
            soc.planted_alignment(i, fa) > soc.planted_alignment(i, fb) ? 1.0
                                                                        : 0.0;
        soc.grounding.per_value[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
            .records.push_back({left, right, gl});
      }

      if (spec.dim == 4) {
        RawInstance ri;
        ri.agent_id = id;
        for (int d = 0; d < 4; ++d) {
          ri.route1[static_cast<std::size_t>(d)] = fa.features[static_cast<std::size_t>(d)];
          ri.route2[static_cast<std::size_t>(d)] = fb.features[static_cast<std::size_t>(d)];
        }
        ri.choice = label == 1.0 ? 1 : 2;
        soc.raw.push_back(ri);
      }
    }
  }

  soc.vs.entities = table;
  soc.grounding.entities = table;
  return soc;
}

std::vector<std::vector<double>> linear_feasibility_scan(
    const std::vector<std::vector<double>>& entity_values,
    const std::vector<int>& ranking, int resolution) {
  if (entity_values.empty())
    throw std::invalid_argument("feasibility scan: no entities");
  if (ranking.size() < 2)
    throw std::invalid_argument("feasibility scan: ranking needs >= 2 entities");
  if (resolution < 1)
    throw std::invalid_argument("feasibility scan: resolution must be >= 1");
  const std::size_t m = entity_values.front().size();
  for (const auto& v : entity_values)
    if (v.size() != m)
      throw std::invalid_argument("feasibility scan: ragged entity values");
  for (int e : ranking)
    if (e < 0 || e >= static_cast<int>(entity_values.size()))
      throw std::invalid_argument("feasibility scan: ranking index out of range");

  std::vector<std::vector<double>> feasible;
  std::vector<int> counts(m, 0);

  auto realizes = [&](const std::vector<double>& w) {
    auto util = [&](int e) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        s += w[i] * entity_values[static_cast<std::size_t>(e)][i];
      return s;
    };
    for (std::size_t a = 0; a < ranking.size(); ++a)
      for (std::size_t b = a + 1; b < ranking.size(); ++b)
        if (!(util(ranking[a]) > util(ranking[b]))) return false;
    return true;
  };

  // enumerate compositions of `resolution` into m parts, lexicographic
  auto visit = [&](auto&& self, std::size_t i, int remaining) -> void {
    if (i + 1 == m) {
      counts[i] = remaining;
      std::vector<double> w(m);
      for (std::size_t k = 0; k < m; ++k)
        w[k] = static_cast<double>(counts[k]) / static_cast<double>(resolution);
      if (realizes(w)) feasible.push_back(std::move(w));
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      counts[i] = k;
      self(self, i + 1, remaining - k);
    }
  };
  visit(visit, 0, resolution);
  return feasible;
}

FlatBtResult baseline_flat_bt(const ValueSystemDataset& vs,
                              const GroundingDataset& grounding,
                              const FlatBtConfig& cfg) {
  if (cfg.steps < 0) throw ConfigError("flat baseline: steps must be >= 0");
  if (cfg.lr < 0) throw ConfigError("flat baseline: lr must be >= 0");

  auto rng = rng::stream(cfg.seed, "flat-init");
  net::Mlp model = net::init_net(vs.feature_dim(), rng);
  const auto& table = *vs.entities;
  const std::size_t ecount = table.size();
  const std::size_t acts = model.activation_size();
  const std::size_t pc = model.param_count();

  std::size_t total_records = vs.record_count();
  std::vector<double> util(ecount), cache(ecount * acts), seeds(ecount);
  double loss = 0.0;

  for (int step = 0; step <= cfg.steps; ++step) {
    par::for_each_index(ecount, [&](std::size_t e) {
      util[e] = model.forward_cached(table[e].features,
                                     {cache.data() + e * acts, acts});
    });

    loss = 0.0;
    std::fill(seeds.begin(), seeds.end(), 0.0);
    const double inv = 1.0 / static_cast<double>(total_records);
    for (const auto& agent : vs.agents) {
      for (const auto& r : agent.records) {
        const double p = pref::logistic(util[r.left] - util[r.right]);
        loss += inv * pref::bt_cross_entropy(p, r.label);
        double g = p - r.label;
        if (p <= pref::kProbEps || p >= 1.0 - pref::kProbEps) g = 0.0;
        seeds[r.left] += inv * g;
        seeds[r.right] -= inv * g;
      }
    }
    if (!std::isfinite(loss))
      throw NumericError("flat baseline: loss diverged");
    if (step == cfg.steps) break;

    std::vector<std::vector<double>> chunk(par::kChunks);
    par::for_each_chunk(ecount, [&](int c, std::size_t b, std::size_t end) {
      auto& buf = chunk[static_cast<std::size_t>(c)];
      buf.assign(pc, 0.0);
      for (std::size_t e = b; e < end; ++e)
        if (seeds[e] != 0.0)
          model.backward(table[e].features, {cache.data() + e * acts, acts},
                         seeds[e], buf);
    });
    std::vector<double> grad(pc, 0.0);
    for (const auto& buf : chunk) {
      if (buf.empty()) continue;
      for (std::size_t k = 0; k < pc; ++k) grad[k] += buf[k];
    }
    for (std::size_t k = 0; k < pc; ++k) model.params[k] -= cfg.lr * grad[k];
  }

  FlatBtResult res;
  res.model = model;
  res.loss = loss;
  metrics::AlignFn fn = [&](std::uint32_t e) { return util[e]; };
  std::vector<metrics::AlignFn> fns{fn};
  metrics::Assignment one;
  one.l_max = 1;
  one.cluster_of.assign(vs.agents.size(), 0);
  res.repr = metrics::representativeness(fns, one, vs);
  for (int i = 0; i < grounding.value_count(); ++i)
    res.coherence.push_back(metrics::coherence_value(
        fn, grounding.per_value[static_cast<std::size_t>(i)]));
  return res;
}

SequentialResult baseline_sequential(const ValueSystemDataset& vs,
                                     const GroundingDataset& grounding,
                                     const SequentialConfig& cfg) {
  if (cfg.grounding_steps < 0 || cfg.weight_steps < 0)
    throw ConfigError("sequential baseline: steps must be >= 0");

  auto rng = rng::stream(cfg.seed, "seq-init");
  const int m = grounding.value_count();
  net::Evaluator ev(vs, grounding);
  net::GroundingParams theta = net::init_grounding(m, vs.feature_dim(), rng);
  std::vector<std::vector<double>> omegas{net::init_omega(m, rng)};
  metrics::Assignment one;
  one.l_max = 1;
  one.cluster_of.assign(vs.agents.size(), 0);

  // stage 1: grounding functions alone
  net::LossSpec ground_only{false, false,
                            std::vector<double>(static_cast<std::size_t>(m), 1.0)};
  for (int step = 0; step < cfg.grounding_steps; ++step) {
    ev.set_parameters(theta);
    net::Gradients g;
    const auto r = ev.evaluate(omegas, one, ground_only, &g);
    if (!std::isfinite(r.total))
      throw NumericError("sequential baseline: grounding loss diverged");
    for (int i = 0; i < m; ++i)
      for (std::size_t k = 0; k < theta.nets[static_cast<std::size_t>(i)].params.size(); ++k)
        theta.nets[static_cast<std::size_t>(i)].params[k] -=
            cfg.alpha_theta * g.theta[static_cast<std::size_t>(i)][k];
  }
  ev.set_parameters(theta);

  // stage 2: a single weight vector on frozen grounding functions
  net::LossSpec repr_only{true, false, {}};
  for (int step = 0; step < cfg.weight_steps; ++step) {
    net::Gradients g;
    const auto r = ev.evaluate(omegas, one, repr_only, &g);
    if (!std::isfinite(r.total))
      throw NumericError("sequential baseline: weight loss diverged");
    for (int i = 0; i < m; ++i)
      omegas[0][static_cast<std::size_t>(i)] -=
          cfg.alpha_omega * g.omega[0][static_cast<std::size_t>(i)];
  }

  const auto fin = ev.evaluate(omegas, one, {true, false, {}});
  SequentialResult res;
  res.theta = std::move(theta);
  res.omega = omegas[0];
  res.repr = fin.repr_metric;
  res.coherence = fin.coherence;
  return res;
}

}  // namespace vsl::synth
