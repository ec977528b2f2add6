#include "vsl/train.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vsl/errors.hpp"
#include "vsl/prefmodel.hpp"

namespace vsl::train {

void TrainConfig::validate() const {
  if (l_max < 1) throw ConfigError("l_max must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (reps_first < 0 || reps_later < 0)
    throw ConfigError("descent repetitions must be >= 0");
  if (alpha_theta < 0 || alpha_omega < 0 || alpha_lambda < 0)
    throw ConfigError("learning rates must be >= 0");
  if (gamma_lambda < 0 || gamma_lambda >= 1)
    throw ConfigError("gamma_lambda must be in [0, 1)");
  if (lambda0 <= 0) throw ConfigError("lambda0 must be > 0");
}

void EmState::validate(int values, int agents) const {
  beta.validate();
  if (beta.agent_count() != agents)
    throw std::invalid_argument("state: assignment size mismatch");
  if (static_cast<int>(omegas.size()) != beta.l_max)
    throw std::invalid_argument("state: need one omega per cluster slot");
  for (const auto& o : omegas)
    if (static_cast<int>(o.size()) != values)
      throw std::invalid_argument("state: omega size must match value count");
  if (static_cast<int>(lambda.size()) != values)
    throw std::invalid_argument("state: lambda size must match value count");
  for (double l : lambda)
    if (!(l > 0.0)) throw std::invalid_argument("state: lambda must be positive");
  if (theta.value_count() != values)
    throw std::invalid_argument("state: net count must match value count");
}

EmState init_state(int l_max, int values, int input_dim, int agents,
                   double lambda0, std::mt19937_64& rng) {
  EmState s;
  s.beta.l_max = l_max;
  s.beta.cluster_of.resize(static_cast<std::size_t>(agents));
  std::uniform_int_distribution<int> pick(0, l_max - 1);
  for (auto& c : s.beta.cluster_of) c = pick(rng);
  s.theta = net::init_grounding(values, input_dim, rng);
  for (int l = 0; l < l_max; ++l) s.omegas.push_back(net::init_omega(values, rng));
  s.lambda.assign(static_cast<std::size_t>(values), lambda0);
  return s;
}

metrics::Assignment e_step(const net::Evaluator& ev,
                           std::span<const std::vector<double>> omegas,
                           int l_max) {
  const auto d = ev.discordance_matrix(omegas, l_max);
  metrics::Assignment beta;
  beta.l_max = l_max;
  beta.cluster_of.resize(static_cast<std::size_t>(ev.agent_count()));
  for (int j = 0; j < ev.agent_count(); ++j) {
    int arg = 0;
    double best = d[static_cast<std::size_t>(j) * l_max];
    for (int l = 1; l < l_max; ++l) {
      const double v = d[static_cast<std::size_t>(j) * l_max + l];
      if (v < best) {
        best = v;
        arg = l;
      }
    }
    beta.cluster_of[static_cast<std::size_t>(j)] = arg;
  }
  return beta;
}

void m_step(net::Evaluator& ev, EmState& state, CoherenceBest& best,
            const TrainConfig& cfg, int repetitions) {
  cfg.validate();
  state.validate(state.theta.value_count(), ev.agent_count());
  if (best.size() != state.lambda.size())
    throw std::invalid_argument("m_step: coherence watermark size mismatch");

  ev.set_parameters(state.theta);
  net::LossSpec spec{true, true, state.lambda};
  for (int rep = 0; rep < repetitions; ++rep) {
    spec.lambda = state.lambda;
    net::Gradients g;
    const auto pre = ev.evaluate(state.omegas, state.beta, spec, &g);
    if (!std::isfinite(pre.total))
      throw NumericError("objective diverged: total loss is not finite");

    for (std::size_t i = 0; i < state.theta.nets.size(); ++i) {
      auto& p = state.theta.nets[i].params;
      const auto& gi = g.theta[i];
      for (std::size_t k = 0; k < p.size(); ++k)
        p[k] -= cfg.alpha_theta * gi[k];
    }
    for (std::size_t l = 0; l < state.omegas.size(); ++l) {
      auto& o = state.omegas[l];
      const auto& go = g.omega[l];
      for (std::size_t k = 0; k < o.size(); ++k)
        o[k] -= cfg.alpha_omega * go[k];
    }

    // multiplier and watermark updates use the post-step losses
    ev.set_parameters(state.theta);
    const auto post = ev.evaluate(state.omegas, state.beta, spec);
    if (cfg.lagrange_ascent) {
      for (std::size_t i = 0; i < state.lambda.size(); ++i) {
        const double decayed = (1.0 - cfg.gamma_lambda) * state.lambda[i];
        state.lambda[i] = best[i] > post.coherence[i]
                              ? decayed + cfg.alpha_lambda * post.loss_grounding[i]
                              : decayed;
      }
    }
    for (std::size_t i = 0; i < best.size(); ++i)
      best[i] = std::max(best[i], post.coherence[i]);
  }
}

void run_em(net::Evaluator& ev, EmState& state, CoherenceBest& best,
            const TrainConfig& cfg, bool keep_first_assignment,
            std::vector<EpochRow>* telemetry) {
  cfg.validate();
  if (state.beta.l_max != cfg.l_max)
    throw std::invalid_argument("run_em: assignment slots != cfg.l_max");

  ev.set_parameters(state.theta);
  for (int r = 0; r < cfg.epochs; ++r) {
    if (!(r == 0 && keep_first_assignment))
      state.beta = e_step(ev, state.omegas, cfg.l_max);
    m_step(ev, state, best, cfg, r == 0 ? cfg.reps_first : cfg.reps_later);

    if (telemetry) {
      const auto post =
          ev.evaluate(state.omegas, state.beta, {true, true, state.lambda});
      EpochRow row;
      row.epoch = r;
      row.loss_repr = post.loss_repr;
      row.loss_conc = post.loss_conc;
      row.total = post.total;
      row.loss_grounding = post.loss_grounding;
      row.coherence = post.coherence;
      row.lambda = state.lambda;
      row.repr = post.repr_metric;
      row.conc = post.conc_metric;
      if (post.conc_metric)
        row.dunn = metrics::dunn_index(post.repr_metric, *post.conc_metric);
      row.populated = state.beta.populated_count();
      telemetry->push_back(row);
    }
  }
}

double loss_representativeness(const net::GroundingParams& theta,
                               const std::vector<std::vector<double>>& omegas,
                               const metrics::Assignment& beta,
                               const ValueSystemDataset& vs) {
  net::Evaluator ev(vs);
  ev.set_parameters(theta);
  return ev.evaluate(omegas, beta, {true, false, {}}).loss_repr;
}

double loss_conciseness(const net::GroundingParams& theta,
                        const std::vector<std::vector<double>>& omegas,
                        const metrics::Assignment& beta,
                        const ValueSystemDataset& vs) {
  net::Evaluator ev(vs);
  ev.set_parameters(theta);
  return ev.evaluate(omegas, beta, {false, true, {}}).loss_conc;
}

double loss_value_system(const net::GroundingParams& theta,
                         const std::vector<std::vector<double>>& omegas,
                         const metrics::Assignment& beta,
                         const ValueSystemDataset& vs) {
  net::Evaluator ev(vs);
  ev.set_parameters(theta);
  return ev.evaluate(omegas, beta, {true, true, {}}).loss_vs();
}

std::vector<double> loss_grounding(const net::GroundingParams& theta,
                                   const GroundingDataset& grounding) {
  if (theta.value_count() != grounding.value_count())
    throw std::invalid_argument("loss_grounding: value count mismatch");
  const auto& table = *grounding.entities;
  std::vector<double> out(static_cast<std::size_t>(grounding.value_count()), 0.0);
  for (int i = 0; i < grounding.value_count(); ++i) {
    const auto& agents = grounding.per_value[static_cast<std::size_t>(i)];
    const auto& nn = theta.nets[static_cast<std::size_t>(i)];
    for (const auto& agent : agents) {
      const double inv = 1.0 / (static_cast<double>(agents.size()) *
                                static_cast<double>(agent.records.size()));
      for (const auto& r : agent.records) {
        const double p = pref::bradley_terry(nn.forward(table[r.left].features),
                                             nn.forward(table[r.right].features));
        out[static_cast<std::size_t>(i)] += inv * pref::bt_cross_entropy(p, r.label);
      }
    }
  }
  return out;
}

double lagrangian(const net::GroundingParams& theta,
                  const std::vector<std::vector<double>>& omegas,
                  const metrics::Assignment& beta,
                  std::span<const double> lambda, const ValueSystemDataset& vs,
                  const GroundingDataset& grounding) {
  net::Evaluator ev(vs, grounding);
  ev.set_parameters(theta);
  net::LossSpec spec{true, true, {lambda.begin(), lambda.end()}};
  return ev.evaluate(omegas, beta, spec).total;
}

}  // namespace vsl::train
