#include "vsl/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vsl/errors.hpp"
#include "vsl/parallel.hpp"
#include "vsl/prefmodel.hpp"

namespace vsl::net {

namespace {

// Stack buffers in the forward/backward kernels bound the layer width.
constexpr int kMaxWidth = 64;

inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Gradient of the clamped cross-entropy with respect to the utility
// difference; zero where the probability clamp is active.
inline double ce_grad_d(double p, double y) {
  if (p <= pref::kProbEps || p >= 1.0 - pref::kProbEps) return 0.0;
  return p - y;
}

// d JSD(p1, p2) / d d1 where p1 = logistic(d1). The logistic factor
// p1(1-p1) kills the log divergence at the saturated ends, where the
// composed derivative tends to zero.
inline double jsd_grad_d(double p1, double p2) {
  const double m = 0.5 * (p1 + p2);
  if (p1 <= 0.0 || p1 >= 1.0 || m <= 0.0 || m >= 1.0) return 0.0;
  if (p1 == p2) return 0.0;
  const double lg = 0.5 * std::log(p1 * (1.0 - m) / (m * (1.0 - p1)));
  return lg * p1 * (1.0 - p1);
}

}  // namespace

Mlp Mlp::make(int input_dim, std::span<const int> hidden) {
  if (input_dim < 1) throw std::invalid_argument("Mlp: input_dim must be >= 1");
  Mlp n;
  n.sizes.push_back(input_dim);
  for (int w : hidden) {
    if (w < 1 || w > kMaxWidth)
      throw std::invalid_argument("Mlp: hidden width out of range");
    n.sizes.push_back(w);
  }
  n.sizes.push_back(1);
  if (input_dim > kMaxWidth)
    throw std::invalid_argument("Mlp: input_dim out of range");
  if (n.sizes.size() > 15) throw std::invalid_argument("Mlp: too many layers");
  n.params.assign(n.param_count(), 0.0);
  return n;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (int l = 0; l + 1 < static_cast<int>(sizes.size()); ++l)
    n += static_cast<std::size_t>(sizes[l + 1]) *
         (static_cast<std::size_t>(sizes[l]) + 1);
  return n;
}

std::size_t Mlp::weight_offset(int layer) const {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l)
    off += static_cast<std::size_t>(sizes[l + 1]) *
           (static_cast<std::size_t>(sizes[l]) + 1);
  return off;
}

std::size_t Mlp::bias_offset(int layer) const {
  return weight_offset(layer) + static_cast<std::size_t>(sizes[layer + 1]) *
                                    static_cast<std::size_t>(sizes[layer]);
}

std::size_t Mlp::activation_size() const {
  std::size_t n = 0;
  for (int l = 1; l < static_cast<int>(sizes.size()); ++l)
    n += static_cast<std::size_t>(sizes[l]);
  return n;
}

double Mlp::forward_cached(std::span<const double> x,
                           std::span<double> acts) const {
  if (static_cast<int>(x.size()) != sizes.front())
    throw std::invalid_argument("Mlp::forward: input size mismatch");
  if (acts.size() < activation_size())
    throw std::invalid_argument("Mlp::forward: activation buffer too small");

  const int layers = layer_count();
  const double* in = x.data();
  std::size_t poff = 0, aoff = 0;
  double z_last = 0.0;
  for (int l = 0; l < layers; ++l) {
    const int nin = sizes[l], nout = sizes[l + 1];
    const double* w = params.data() + poff;
    const double* b = w + static_cast<std::size_t>(nout) * nin;
    double* out = acts.data() + aoff;
    for (int r = 0; r < nout; ++r) {
      double z = b[r];
      const double* wr = w + static_cast<std::size_t>(r) * nin;
      for (int c = 0; c < nin; ++c) z += wr[c] * in[c];
      if (l + 1 < layers) {
        out[r] = std::tanh(z);
      } else {
        out[r] = z;
        z_last = z;
      }
    }
    in = out;
    poff += static_cast<std::size_t>(nout) * (nin + 1);
    aoff += static_cast<std::size_t>(nout);
  }
  return -softplus(z_last);
}

double Mlp::forward(std::span<const double> x) const {
  double stack[4 * kMaxWidth];
  const std::size_t need = activation_size();
  if (need <= sizeof(stack) / sizeof(double))
    return forward_cached(x, {stack, need});
  std::vector<double> heap(need);
  return forward_cached(x, heap);
}

void Mlp::backward(std::span<const double> x, std::span<const double> acts,
                   double gout, std::span<double> grad) const {
  const int layers = layer_count();
  // offset of each layer's output block inside acts
  std::size_t act_off[16];
  act_off[0] = 0;
  for (int l = 1; l < layers; ++l)
    act_off[l] = act_off[l - 1] + static_cast<std::size_t>(sizes[l]);

  double gz[kMaxWidth], gnext[kMaxWidth];
  const double z_last = acts[act_off[layers - 1]];
  gz[0] = gout * (-sigmoid(z_last));

  for (int l = layers - 1; l >= 0; --l) {
    const int nin = sizes[l], nout = sizes[l + 1];
    const double* hin = l == 0 ? x.data() : acts.data() + act_off[l - 1];
    const double* w = params.data() + weight_offset(l);
    double* gw = grad.data() + weight_offset(l);
    double* gb = grad.data() + bias_offset(l);
    for (int r = 0; r < nout; ++r) {
      const double g = gz[r];
      gb[r] += g;
      double* gwr = gw + static_cast<std::size_t>(r) * nin;
      for (int c = 0; c < nin; ++c) gwr[c] += g * hin[c];
    }
    if (l > 0) {
      for (int c = 0; c < nin; ++c) {
        double s = 0.0;
        for (int r = 0; r < nout; ++r)
          s += w[static_cast<std::size_t>(r) * nin + c] * gz[r];
        const double h = hin[c];
        gnext[c] = s * (1.0 - h * h);
      }
      std::copy(gnext, gnext + nin, gz);
    }
  }
}

std::vector<double> softmax(std::span<const double> omega) {
  if (omega.empty()) throw std::invalid_argument("softmax: empty input");
  const double m = *std::max_element(omega.begin(), omega.end());
  std::vector<double> out(omega.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    out[i] = std::exp(omega[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double vs_value(std::span<const double> weights,
                std::span<const double> alignments) {
  if (weights.size() != alignments.size())
    throw std::invalid_argument("vs_value: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    s += weights[i] * alignments[i];
  return s;
}

Mlp init_net(int input_dim, std::mt19937_64& rng, std::span<const int> hidden) {
  Mlp n = Mlp::make(input_dim, hidden);
  for (int l = 0; l < n.layer_count(); ++l) {
    const int nin = n.sizes[l], nout = n.sizes[l + 1];
    const double limit = std::sqrt(6.0 / (nin + nout));
    std::uniform_real_distribution<double> u(-limit, limit);
    double* w = n.params.data() + n.weight_offset(l);
    for (std::size_t k = 0; k < static_cast<std::size_t>(nout) * nin; ++k)
      w[k] = u(rng);
  }
  return n;
}

GroundingParams init_grounding(int values, int input_dim,
                               std::mt19937_64& rng) {
  if (values < 1) throw std::invalid_argument("init_grounding: values < 1");
  GroundingParams g;
  for (int i = 0; i < values; ++i) g.nets.push_back(init_net(input_dim, rng));
  return g;
}

std::vector<double> init_omega(int values, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(values));
  for (double& v : w) v = 0.1 * n(rng);
  return w;
}

Evaluator::Evaluator(const ValueSystemDataset& vs,
                     const GroundingDataset* grounding)
    : vs_(&vs), gr_(grounding) {
  if (!vs.entities || vs.entities->empty())
    throw std::invalid_argument("evaluator: empty entity table");
  if (gr_ && gr_->entities != vs.entities)
    throw std::invalid_argument("evaluator: datasets must share one entity table");
  e_ = static_cast<int>(vs.entities->size());
  dim_ = vs.feature_dim();
  j_ = vs.agent_count();
  m_ = gr_ ? gr_->value_count() : 0;
  if (j_ == 0) throw std::invalid_argument("evaluator: no agents");
  if (gr_ && m_ == 0) throw std::invalid_argument("evaluator: no values");

  feat_.resize(static_cast<std::size_t>(e_) * dim_);
  for (int e = 0; e < e_; ++e) {
    const auto& f = (*vs.entities)[static_cast<std::size_t>(e)].features;
    if (static_cast<int>(f.size()) != dim_)
      throw std::invalid_argument("evaluator: ragged entity features");
    std::copy(f.begin(), f.end(),
              feat_.begin() + static_cast<std::size_t>(e) * dim_);
  }

  auto check_records = [&](const AgentDataset& a) {
    if (a.records.empty())
      throw std::invalid_argument("evaluator: agent '" + a.agent_id +
                                  "' has no records");
    for (const auto& r : a.records) {
      if (r.left >= static_cast<std::uint32_t>(e_) ||
          r.right >= static_cast<std::uint32_t>(e_))
        throw std::invalid_argument("evaluator: record entity out of range");
      if (r.label != 0.0 && r.label != 0.5 && r.label != 1.0)
        throw std::invalid_argument("evaluator: label must be 0, 0.5 or 1");
    }
  };
  for (const auto& a : vs.agents) check_records(a);
  if (gr_) {
    for (const auto& value_agents : gr_->per_value) {
      if (value_agents.empty())
        throw std::invalid_argument(
            "evaluator: value with no contributing agents");
      for (const auto& a : value_agents) check_records(a);
    }
  }
}

Evaluator::Evaluator(const ValueSystemDataset& vs,
                     const GroundingDataset& grounding)
    : Evaluator(vs, &grounding) {}

Evaluator::Evaluator(const ValueSystemDataset& vs) : Evaluator(vs, nullptr) {}

void Evaluator::set_parameters(const GroundingParams& theta) {
  if (theta.nets.empty())
    throw std::invalid_argument("set_parameters: no nets");
  if (!gr_)
    m_ = theta.value_count();
  else if (theta.value_count() != m_)
    throw std::invalid_argument("set_parameters: wrong number of nets");
  if (theta.nets.front().sizes.back() != 1)
    throw std::invalid_argument("set_parameters: nets must map to a scalar");
  for (const auto& n : theta.nets) {
    if (n.input_dim() != dim_)
      throw std::invalid_argument("set_parameters: input dim mismatch");
    if (n.sizes != theta.nets.front().sizes)
      throw std::invalid_argument("set_parameters: nets must share one shape");
  }
  theta_ = theta;
  has_theta_ = true;
  act_size_ = theta_.nets.front().activation_size();
  align_.resize(static_cast<std::size_t>(m_) * e_);
  acts_.resize(static_cast<std::size_t>(m_) * e_ * act_size_);

  par::for_each_index(static_cast<std::size_t>(e_), [&](std::size_t e) {
    for (int i = 0; i < m_; ++i) {
      double* slot =
          acts_.data() + (static_cast<std::size_t>(i) * e_ + e) * act_size_;
      align_[static_cast<std::size_t>(i) * e_ + e] =
          theta_.nets[static_cast<std::size_t>(i)].forward_cached(
              entity(static_cast<int>(e)), {slot, act_size_});
    }
  });
}

const GroundingParams& Evaluator::parameters() const {
  if (!has_theta_) throw std::logic_error("evaluator: parameters not set");
  return theta_;
}

std::span<const double> Evaluator::alignment_row(int value) const {
  if (!has_theta_) throw std::logic_error("evaluator: parameters not set");
  return {align_.data() + static_cast<std::size_t>(value) * e_,
          static_cast<std::size_t>(e_)};
}

metrics::AlignFn Evaluator::alignment_fn(int value) const {
  auto row = alignment_row(value);
  return [row](std::uint32_t e) { return row[e]; };
}

metrics::AlignFn Evaluator::utility_fn(std::vector<double> weights) const {
  if (!has_theta_) throw std::logic_error("evaluator: parameters not set");
  if (static_cast<int>(weights.size()) != m_)
    throw std::invalid_argument("utility_fn: weight size mismatch");
  const double* a = align_.data();
  const int e = e_;
  return [a, e, w = std::move(weights)](std::uint32_t ent) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i * e + ent];
    return s;
  };
}

EvalResult Evaluator::evaluate(std::span<const std::vector<double>> omegas,
                               const metrics::Assignment& beta,
                               const LossSpec& spec, Gradients* grads) const {
  if (!has_theta_) throw std::logic_error("evaluator: parameters not set");
  beta.validate();
  if (beta.agent_count() != j_)
    throw std::invalid_argument("evaluate: assignment size mismatch");
  const int big_l = beta.l_max;
  if (static_cast<int>(omegas.size()) != big_l)
    throw std::invalid_argument("evaluate: need one omega per cluster slot");
  for (const auto& o : omegas)
    if (static_cast<int>(o.size()) != m_)
      throw std::invalid_argument("evaluate: omega size must match value count");
  if (!spec.lambda.empty() && static_cast<int>(spec.lambda.size()) != m_)
    throw std::invalid_argument("evaluate: lambda size must match value count");
  if (!spec.lambda.empty() && !gr_)
    throw std::invalid_argument("evaluate: lambda given without grounding data");

  EvalResult res;
  if (gr_) {
    res.loss_grounding.assign(static_cast<std::size_t>(m_), 0.0);
    res.coherence.assign(static_cast<std::size_t>(m_), 0.0);
  }

  std::vector<std::vector<double>> w(static_cast<std::size_t>(big_l));
  for (int l = 0; l < big_l; ++l)
    w[static_cast<std::size_t>(l)] = softmax(omegas[static_cast<std::size_t>(l)]);

  const auto pops = beta.populated();

  // cluster utility per entity, populated slots only
  std::vector<std::vector<double>> u(static_cast<std::size_t>(big_l));
  for (int l : pops) {
    auto& row = u[static_cast<std::size_t>(l)];
    row.resize(static_cast<std::size_t>(e_));
    const auto& wl = w[static_cast<std::size_t>(l)];
    for (int e = 0; e < e_; ++e) {
      double s = 0.0;
      for (int i = 0; i < m_; ++i)
        s += wl[static_cast<std::size_t>(i)] *
             align_[static_cast<std::size_t>(i) * e_ + e];
      row[static_cast<std::size_t>(e)] = s;
    }
  }

  std::vector<double> seeds;
  if (grads) {
    seeds.assign(static_cast<std::size_t>(m_) * e_, 0.0);
    grads->omega.assign(static_cast<std::size_t>(big_l),
                        std::vector<double>(static_cast<std::size_t>(m_), 0.0));
  }

  // accumulates one record's utility-difference gradient into the seed
  // table and the omega gradient of cluster l
  auto push_record_grad = [&](int l, const PreferenceRecord& r, double g) {
    if (g == 0.0) return;
    const auto& wl = w[static_cast<std::size_t>(l)];
    const auto& ul = u[static_cast<std::size_t>(l)];
    auto& go = grads->omega[static_cast<std::size_t>(l)];
    for (int i = 0; i < m_; ++i) {
      const double wi = wl[static_cast<std::size_t>(i)];
      seeds[static_cast<std::size_t>(i) * e_ + r.left] += g * wi;
      seeds[static_cast<std::size_t>(i) * e_ + r.right] -= g * wi;
      const double al = align_[static_cast<std::size_t>(i) * e_ + r.left];
      const double ar = align_[static_cast<std::size_t>(i) * e_ + r.right];
      go[static_cast<std::size_t>(i)] +=
          g * wi * ((al - ul[r.left]) - (ar - ul[r.right]));
    }
  };

  // representativeness loss and its disagreement-based metric
  double delta_mean_sum = 0.0;
  for (int j = 0; j < j_; ++j) {
    const auto& agent = vs_->agents[static_cast<std::size_t>(j)];
    const int l = beta.cluster_of[static_cast<std::size_t>(j)];
    const auto& ul = u[static_cast<std::size_t>(l)];
    const double inv =
        1.0 / (static_cast<double>(j_) * static_cast<double>(agent.records.size()));
    double dsum = 0.0;
    for (const auto& r : agent.records) {
      const double p = pref::logistic(ul[r.left] - ul[r.right]);
      dsum += pref::delta(p, r.label);
      res.loss_repr += inv * pref::bt_cross_entropy(p, r.label);
      if (grads && spec.use_repr)
        push_record_grad(l, r, inv * ce_grad_d(p, r.label));
    }
    delta_mean_sum += dsum / static_cast<double>(agent.records.size());
  }
  res.repr_metric = 1.0 - delta_mean_sum / static_cast<double>(j_);

  // conciseness: minimum mean divergence over populated cluster pairs
  if (pops.size() >= 2) {
    std::vector<std::vector<int>> members(static_cast<std::size_t>(big_l));
    for (int j = 0; j < j_; ++j)
      members[static_cast<std::size_t>(beta.cluster_of[static_cast<std::size_t>(j)])]
          .push_back(j);

    double best_loss = 0.0, best_delta = 0.0;
    int best_a = -1, best_b = -1;
    bool first = true;
    for (std::size_t ai = 0; ai < pops.size(); ++ai) {
      for (std::size_t bi = ai + 1; bi < pops.size(); ++bi) {
        const int a = pops[ai], b = pops[bi];
        const auto& ua = u[static_cast<std::size_t>(a)];
        const auto& ub = u[static_cast<std::size_t>(b)];
        double jsd_sum = 0.0, delta_sum = 0.0;
        int count = 0;
        for (int l : {a, b}) {
          for (int j : members[static_cast<std::size_t>(l)]) {
            const auto& recs = vs_->agents[static_cast<std::size_t>(j)].records;
            double ja = 0.0, da = 0.0;
            for (const auto& r : recs) {
              const double pa = pref::logistic(ua[r.left] - ua[r.right]);
              const double pb = pref::logistic(ub[r.left] - ub[r.right]);
              ja += pref::jsd_bernoulli(pa, pb);
              da += pref::delta(pa, pb);
            }
            jsd_sum += ja / static_cast<double>(recs.size());
            delta_sum += da / static_cast<double>(recs.size());
            ++count;
          }
        }
        const double jv = jsd_sum / count;
        const double dv = delta_sum / count;
        if (first || jv < best_loss) {
          best_loss = jv;
          best_a = a;
          best_b = b;
        }
        if (first || dv < best_delta) best_delta = dv;
        first = false;
      }
    }
    res.loss_conc = best_loss;
    res.conc_metric = best_delta;
    res.conc_pair = {best_a, best_b};

    // subgradient flows through the argmin pair only
    if (grads && spec.use_conc) {
      const auto& ua = u[static_cast<std::size_t>(best_a)];
      const auto& ub = u[static_cast<std::size_t>(best_b)];
      int count = static_cast<int>(members[static_cast<std::size_t>(best_a)].size() +
                                   members[static_cast<std::size_t>(best_b)].size());
      for (int l : {best_a, best_b}) {
        for (int j : members[static_cast<std::size_t>(l)]) {
          const auto& recs = vs_->agents[static_cast<std::size_t>(j)].records;
          const double inv =
              1.0 / (static_cast<double>(count) * static_cast<double>(recs.size()));
          for (const auto& r : recs) {
            const double pa = pref::logistic(ua[r.left] - ua[r.right]);
            const double pb = pref::logistic(ub[r.left] - ub[r.right]);
            // minus: the total subtracts the conciseness loss
            push_record_grad(best_a, r, -inv * jsd_grad_d(pa, pb));
            push_record_grad(best_b, r, -inv * jsd_grad_d(pb, pa));
          }
        }
      }
    }
  }

  // grounding losses and coherence, one shared function per value
  for (int i = 0; gr_ && i < m_; ++i) {
    const auto& agents = gr_->per_value[static_cast<std::size_t>(i)];
    const double lam = spec.lambda.empty() ? 0.0 : spec.lambda[static_cast<std::size_t>(i)];
    const double* ai = align_.data() + static_cast<std::size_t>(i) * e_;
    double delta_sum = 0.0;
    for (const auto& agent : agents) {
      const double inv = 1.0 / (static_cast<double>(agents.size()) *
                                static_cast<double>(agent.records.size()));
      double dsum = 0.0;
      for (const auto& r : agent.records) {
        const double p = pref::logistic(ai[r.left] - ai[r.right]);
        dsum += pref::delta(p, r.label);
        res.loss_grounding[static_cast<std::size_t>(i)] +=
            inv * pref::bt_cross_entropy(p, r.label);
        if (grads && lam != 0.0) {
          const double g = lam * inv * ce_grad_d(p, r.label);
          seeds[static_cast<std::size_t>(i) * e_ + r.left] += g;
          seeds[static_cast<std::size_t>(i) * e_ + r.right] -= g;
        }
      }
      delta_sum += dsum / static_cast<double>(agent.records.size());
    }
    res.coherence[static_cast<std::size_t>(i)] =
        1.0 - delta_sum / static_cast<double>(agents.size());
  }

  res.total = (spec.use_repr ? res.loss_repr : 0.0) -
              (spec.use_conc ? res.loss_conc : 0.0);
  for (int i = 0; i < m_; ++i)
    if (!spec.lambda.empty())
      res.total += spec.lambda[static_cast<std::size_t>(i)] *
                   res.loss_grounding[static_cast<std::size_t>(i)];

  if (grads) {
    const std::size_t pc = theta_.nets.front().param_count();
    grads->theta.assign(static_cast<std::size_t>(m_), {});
    for (int i = 0; i < m_; ++i)
      grads->theta[static_cast<std::size_t>(i)].assign(pc, 0.0);

    // per-chunk buffers, reduced in ascending chunk order afterwards
    std::vector<std::vector<double>> chunk(par::kChunks);
    par::for_each_chunk(static_cast<std::size_t>(e_),
                        [&](int c, std::size_t b, std::size_t end) {
      auto& buf = chunk[static_cast<std::size_t>(c)];
      buf.assign(static_cast<std::size_t>(m_) * pc, 0.0);
      for (std::size_t e = b; e < end; ++e) {
        for (int i = 0; i < m_; ++i) {
          const double g = seeds[static_cast<std::size_t>(i) * e_ + e];
          if (g == 0.0) continue;
          const double* slot =
              acts_.data() + (static_cast<std::size_t>(i) * e_ + e) * act_size_;
          theta_.nets[static_cast<std::size_t>(i)].backward(
              entity(static_cast<int>(e)), {slot, act_size_}, g,
              {buf.data() + static_cast<std::size_t>(i) * pc, pc});
        }
      }
    });
    for (const auto& buf : chunk) {
      if (buf.empty()) continue;
      for (int i = 0; i < m_; ++i) {
        auto& gi = grads->theta[static_cast<std::size_t>(i)];
        const double* src = buf.data() + static_cast<std::size_t>(i) * pc;
        for (std::size_t k = 0; k < pc; ++k) gi[k] += src[k];
      }
    }

    for (int i = 0; i < m_; ++i)
      for (std::size_t k = 0; k < pc; ++k)
        if (!std::isfinite(grads->theta[static_cast<std::size_t>(i)][k]))
          throw NumericError("non-finite gradient in grounding net " +
                             std::to_string(i) + " at parameter " +
                             std::to_string(k));
    for (int l = 0; l < big_l; ++l)
      for (int i = 0; i < m_; ++i)
        if (!std::isfinite(grads->omega[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)]))
          throw NumericError("non-finite gradient in cluster weights " +
                             std::to_string(l));
  }
  return res;
}

std::vector<double> Evaluator::discordance_matrix(
    std::span<const std::vector<double>> omegas, int l_max) const {
  if (!has_theta_) throw std::logic_error("evaluator: parameters not set");
  if (static_cast<int>(omegas.size()) != l_max)
    throw std::invalid_argument("discordance_matrix: omega count mismatch");

  std::vector<std::vector<double>> u(static_cast<std::size_t>(l_max));
  for (int l = 0; l < l_max; ++l) {
    const auto wl = softmax(omegas[static_cast<std::size_t>(l)]);
    auto& row = u[static_cast<std::size_t>(l)];
    row.resize(static_cast<std::size_t>(e_));
    for (int e = 0; e < e_; ++e) {
      double s = 0.0;
      for (int i = 0; i < m_; ++i)
        s += wl[static_cast<std::size_t>(i)] *
             align_[static_cast<std::size_t>(i) * e_ + e];
      row[static_cast<std::size_t>(e)] = s;
    }
  }

  std::vector<double> out(static_cast<std::size_t>(j_) * l_max);
  for (int j = 0; j < j_; ++j) {
    const auto& recs = vs_->agents[static_cast<std::size_t>(j)].records;
    for (int l = 0; l < l_max; ++l) {
      const auto& ul = u[static_cast<std::size_t>(l)];
      double dsum = 0.0;
      for (const auto& r : recs)
        dsum += pref::delta(pref::logistic(ul[r.left] - ul[r.right]), r.label);
      out[static_cast<std::size_t>(j) * l_max + l] =
          dsum / static_cast<double>(recs.size());
    }
  }
  return out;
}

double finite_difference_check(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> point, std::span<const double> analytic,
    int sample_size, std::uint64_t seed, double h) {
  if (point.size() != analytic.size())
    throw std::invalid_argument("finite_difference_check: size mismatch");
  const std::size_t n = point.size();

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (sample_size > 0 && static_cast<std::size_t>(sample_size) < n) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(sample_size));
    std::sort(idx.begin(), idx.end());
  }

  std::vector<double> x(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i : idx) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    const double fd = (fp - fm) / (2.0 * h);
    const double an = analytic[i];
    const double err =
        std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
    worst = std::max(worst, err);
  }
  return worst;
}

double fd_check_objective(const GroundingParams& theta,
                          const std::vector<std::vector<double>>& omegas,
                          const metrics::Assignment& beta, const LossSpec& spec,
                          const ValueSystemDataset& vs,
                          const GroundingDataset& grounding, int sample_size,
                          std::uint64_t seed, double h) {
  Evaluator ev(vs, grounding);
  ev.set_parameters(theta);
  Gradients g;
  ev.evaluate(omegas, beta, spec, &g);

  std::vector<double> point, analytic;
  for (const auto& n : theta.nets)
    point.insert(point.end(), n.params.begin(), n.params.end());
  for (const auto& o : omegas) point.insert(point.end(), o.begin(), o.end());
  for (const auto& gi : g.theta)
    analytic.insert(analytic.end(), gi.begin(), gi.end());
  for (const auto& go : g.omega)
    analytic.insert(analytic.end(), go.begin(), go.end());

  auto unpack_eval = [&](std::span<const double> x) {
    GroundingParams t = theta;
    std::vector<std::vector<double>> om = omegas;
    std::size_t off = 0;
    for (auto& n : t.nets) {
      std::copy(x.begin() + off, x.begin() + off + n.params.size(),
                n.params.begin());
      off += n.params.size();
    }
    for (auto& o : om) {
      std::copy(x.begin() + off, x.begin() + off + o.size(), o.begin());
      off += o.size();
    }
    ev.set_parameters(t);
    return ev.evaluate(om, beta, spec).total;
  };
  const double worst = finite_difference_check(unpack_eval, point, analytic,
                                               sample_size, seed, h);
  ev.set_parameters(theta);  // restore
  return worst;
}

}  // namespace vsl::net
