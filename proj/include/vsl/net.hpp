#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "vsl/dataset.hpp"
#include "vsl/metrics.hpp"

namespace vsl::net {

// Hidden layer widths shared by every grounding function.
inline constexpr std::array<int, 3> kGroundingHidden{16, 24, 16};

// Fully connected net with tanh hidden activations. The scalar output is
// mapped through a negated softplus, so alignment values are strictly
// negative and a preference probability of exactly 0 or 1 is unreachable.
struct Mlp {
  std::vector<int> sizes;       // {input, hidden..., 1}
  std::vector<double> params;   // per layer: row-major weights, then biases

  static Mlp make(int input_dim, std::span<const int> hidden = kGroundingHidden);

  int input_dim() const { return sizes.front(); }
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }
  std::size_t param_count() const;
  std::size_t weight_offset(int layer) const;  // start of layer's weights
  std::size_t bias_offset(int layer) const;

  // Total scratch doubles needed by forward_cached: one slot per neuron.
  std::size_t activation_size() const;

  double forward(std::span<const double> x) const;
  double forward_cached(std::span<const double> x, std::span<double> acts) const;

  // Accumulates gout * d(output)/d(params) into grad (same layout as
  // params). acts must come from forward_cached at the same parameters.
  void backward(std::span<const double> x, std::span<const double> acts,
                double gout, std::span<double> grad) const;
};

// Shared grounding functions, one per value.
struct GroundingParams {
  std::vector<Mlp> nets;

  int value_count() const { return static_cast<int>(nets.size()); }
  int input_dim() const { return nets.front().input_dim(); }
};

// Numerically stable softmax; invariant to adding a constant to every
// component by max-subtraction.
std::vector<double> softmax(std::span<const double> omega);

double vs_value(std::span<const double> weights,
                std::span<const double> alignments);

// Glorot-uniform weights, zero biases.
Mlp init_net(int input_dim, std::mt19937_64& rng,
             std::span<const int> hidden = kGroundingHidden);
GroundingParams init_grounding(int values, int input_dim, std::mt19937_64& rng);
// Unnormalized cluster weight logits, N(0, 0.1^2).
std::vector<double> init_omega(int values, std::mt19937_64& rng);

// Which loss terms evaluate() sums into `total`. When lambda is empty the
// grounding losses are still reported but excluded from the total.
struct LossSpec {
  bool use_repr = true;
  bool use_conc = true;
  std::vector<double> lambda;
};

struct Gradients {
  std::vector<std::vector<double>> theta;  // per value, Mlp::params layout
  std::vector<std::vector<double>> omega;  // per cluster slot
};

struct EvalResult {
  double loss_repr = 0.0;
  double loss_conc = 0.0;
  double total = 0.0;
  std::vector<double> loss_grounding;            // per value, unweighted
  std::vector<double> coherence;                 // per value
  double repr_metric = 1.0;                      // disagreement-based
  std::optional<double> conc_metric;
  std::optional<std::pair<int, int>> conc_pair;  // argmin pair of the loss

  double loss_vs() const { return loss_repr - loss_conc; }
};

// Evaluates losses, metrics and gradients over a value-system dataset and
// its grounding companion. Alignment values and per-neuron activations
// are cached per entity when parameters are set, so each gradient pass
// runs one forward and one backward sweep over the entity table. Sweeps
// are parallel over entities; per-record reductions are serial in a fixed
// order, so results do not depend on the thread count.
class Evaluator {
 public:
  Evaluator(const ValueSystemDataset& vs, const GroundingDataset& grounding);
  // Without a grounding dataset the grounding losses and coherence stay
  // empty and lambda must be empty; everything else works unchanged.
  explicit Evaluator(const ValueSystemDataset& vs);

  int entity_count() const { return e_; }
  int value_count() const { return m_; }
  int agent_count() const { return j_; }
  int feature_dim() const { return dim_; }

  void set_parameters(const GroundingParams& theta);
  const GroundingParams& parameters() const;

  std::span<const double> alignment_row(int value) const;
  metrics::AlignFn alignment_fn(int value) const;
  // Cluster utility over cached alignments for pre-softmaxed weights.
  metrics::AlignFn utility_fn(std::vector<double> weights) const;

  EvalResult evaluate(std::span<const std::vector<double>> omegas,
                      const metrics::Assignment& beta, const LossSpec& spec,
                      Gradients* grads = nullptr) const;

  // Row-major agent x cluster mean disagreement table over all slots.
  std::vector<double> discordance_matrix(
      std::span<const std::vector<double>> omegas, int l_max) const;

 private:
  Evaluator(const ValueSystemDataset& vs, const GroundingDataset* grounding);

  const ValueSystemDataset* vs_;
  const GroundingDataset* gr_;
  int e_ = 0, m_ = 0, j_ = 0, dim_ = 0;
  std::vector<double> feat_;   // entity features, row-major
  GroundingParams theta_;
  bool has_theta_ = false;
  std::size_t act_size_ = 0;
  std::vector<double> align_;  // m x E
  std::vector<double> acts_;   // m x E x act_size

  std::span<const double> entity(int e) const {
    return {feat_.data() + static_cast<std::size_t>(e) * dim_,
            static_cast<std::size_t>(dim_)};
  }
};

// Max relative error between analytic and central-difference gradients on
// a random coordinate subsample.
double finite_difference_check(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> point, std::span<const double> analytic,
    int sample_size, std::uint64_t seed, double h = 1e-5);

// Convenience check of the full training objective's gradient at the
// given parameters. Flattens all net parameters and cluster logits.
double fd_check_objective(const GroundingParams& theta,
                          const std::vector<std::vector<double>>& omegas,
                          const metrics::Assignment& beta,
                          const LossSpec& spec, const ValueSystemDataset& vs,
                          const GroundingDataset& grounding, int sample_size,
                          std::uint64_t seed, double h = 1e-5);

}  // namespace vsl::net
