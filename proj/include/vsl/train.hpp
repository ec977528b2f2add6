#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "vsl/metrics.hpp"
#include "vsl/net.hpp"

namespace vsl::train {

struct TrainConfig {
  int l_max = 1;
  int epochs = 1;        // EM epochs per refinement call
  int reps_first = 10;   // descent repetitions in the first epoch
  int reps_later = 10;   // repetitions in later epochs
  double alpha_theta = 0.005;
  double alpha_omega = 0.01;
  double alpha_lambda = 0.005;
  double gamma_lambda = 1e-4;
  double lambda0 = 0.01;
  bool lagrange_ascent = true;

  void validate() const;  // throws ConfigError
};

// One candidate solution of the bi-level problem.
struct EmState {
  metrics::Assignment beta;
  net::GroundingParams theta;
  std::vector<std::vector<double>> omegas;  // one logit vector per slot
  std::vector<double> lambda;               // per-value multiplier, positive

  void validate(int values, int agents) const;
};

// Best grounding coherence seen per value across an entire search; the
// multiplier only rises while coherence sits below this watermark.
using CoherenceBest = std::vector<double>;

struct EpochRow {
  int epoch = 0;
  double loss_repr = 0.0;
  double loss_conc = 0.0;
  double total = 0.0;
  std::vector<double> loss_grounding;
  std::vector<double> coherence;
  std::vector<double> lambda;
  double repr = 0.0;
  std::optional<double> conc;
  std::optional<double> dunn;
  int populated = 1;
};

// Random starting point: uniform assignment, Glorot nets, small-noise
// cluster logits, constant multipliers.
EmState init_state(int l_max, int values, int input_dim, int agents,
                   double lambda0, std::mt19937_64& rng);

// Reassigns every agent to its least-discordant cluster slot; ties pick
// the lowest slot index.
metrics::Assignment e_step(const net::Evaluator& ev,
                           std::span<const std::vector<double>> omegas,
                           int l_max);

// `repetitions` rounds of joint full-batch descent on nets and cluster
// logits, each followed by the multiplier update evaluated at the new
// parameters.
void m_step(net::Evaluator& ev, EmState& state, CoherenceBest& best,
            const TrainConfig& cfg, int repetitions);

// Alternates assignment and descent for cfg.epochs rounds. When
// keep_first_assignment, epoch 0 trains against the incoming assignment
// unchanged (used right after a structural mutation).
void run_em(net::Evaluator& ev, EmState& state, CoherenceBest& best,
            const TrainConfig& cfg, bool keep_first_assignment,
            std::vector<EpochRow>* telemetry = nullptr);

// Single-evaluation loss entry points.
double loss_representativeness(const net::GroundingParams& theta,
                               const std::vector<std::vector<double>>& omegas,
                               const metrics::Assignment& beta,
                               const ValueSystemDataset& vs);
double loss_conciseness(const net::GroundingParams& theta,
                        const std::vector<std::vector<double>>& omegas,
                        const metrics::Assignment& beta,
                        const ValueSystemDataset& vs);
double loss_value_system(const net::GroundingParams& theta,
                         const std::vector<std::vector<double>>& omegas,
                         const metrics::Assignment& beta,
                         const ValueSystemDataset& vs);
std::vector<double> loss_grounding(const net::GroundingParams& theta,
                                   const GroundingDataset& grounding);
double lagrangian(const net::GroundingParams& theta,
                  const std::vector<std::vector<double>>& omegas,
                  const metrics::Assignment& beta,
                  std::span<const double> lambda,
                  const ValueSystemDataset& vs,
                  const GroundingDataset& grounding);

}  // namespace vsl::train
