#pragma once

#include <optional>
#include <vector>

#include "vsl/dataset.hpp"

// Serial textbook implementations of every quantity the optimized library
// computes. Written straight from the formulas, with none of the caching,
// chunking or algebraic rearrangement used by the parallel kernels; tests
// and the benchmark compare the two.
namespace ref {

// exp(a) / (exp(a) + exp(b)), shifted by the larger exponent.
double bt(double left, double right);

// 1 when the two preference probabilities disagree about which side wins.
int delta(double p, double q);

// Jensen-Shannon divergence of Bernoulli(p) and Bernoulli(q), natural log.
double jsd(double p, double q);

// Cross-entropy of predicting p against soft label y, clamped at 1e-12.
double cross_entropy(double p, double y);

// Tanh MLP with a -log(1 + exp(z)) output, evaluated layer by layer.
double mlp_forward(const std::vector<int>& sizes,
                   const std::vector<double>& params,
                   const std::vector<double>& x);

std::vector<double> softmax(const std::vector<double>& omega);

// Alignment and utility values for every entity, built by running the
// naive forward pass per entity.
struct Tables {
  std::vector<std::vector<double>> align;  // value x entity
  std::vector<std::vector<double>> util;   // cluster slot x entity
};

Tables build_tables(const std::vector<std::vector<int>>& net_sizes,
                    const std::vector<std::vector<double>>& net_params,
                    const std::vector<std::vector<double>>& omegas,
                    const vsl::ValueSystemDataset& vs);

// Metrics as written: double loops over agents and records.
double discordance(const std::vector<double>& util,
                   const vsl::AgentDataset& agent);
double inter_cluster(const std::vector<double>& util_a,
                     const std::vector<double>& util_b,
                     const std::vector<const vsl::AgentDataset*>& agents);
double dunn(double repr, double conc);
double representativeness(const Tables& t, const std::vector<int>& beta,
                          const vsl::ValueSystemDataset& vs);
std::optional<double> conciseness_metric(const Tables& t,
                                         const std::vector<int>& beta,
                                         int l_max,
                                         const vsl::ValueSystemDataset& vs);
std::vector<double> coherence(const Tables& t,
                              const vsl::GroundingDataset& gr);

// Loss terms, every record recomputed in place.
double loss_repr(const Tables& t, const std::vector<int>& beta,
                 const vsl::ValueSystemDataset& vs);
std::optional<double> loss_conc(const Tables& t, const std::vector<int>& beta,
                                int l_max, const vsl::ValueSystemDataset& vs);
std::vector<double> loss_grounding(const Tables& t,
                                   const vsl::GroundingDataset& gr);

// use_repr * L_r - use_conc * L_c + sum_i lambda_i * L_V_i.
double total_loss(const Tables& t, const std::vector<int>& beta, int l_max,
                  const std::vector<double>& lambda, bool use_repr,
                  bool use_conc, const vsl::ValueSystemDataset& vs,
                  const vsl::GroundingDataset& gr);

}  // namespace ref
