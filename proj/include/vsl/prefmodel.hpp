#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsl::pref {

// Probability clamp used inside the cross-entropy only.
inline constexpr double kProbEps = 1e-12;

// Bradley-Terry preference probability exp(aL) / (exp(aL) + exp(aR)),
// evaluated as a logistic of the difference so large alignments cannot
// overflow. Non-finite alignments signal upstream divergence.
inline double bradley_terry(double a_left, double a_right) {
  if (!std::isfinite(a_left) || !std::isfinite(a_right))
    throw std::domain_error("bradley_terry: non-finite alignment value");
  return 1.0 / (1.0 + std::exp(a_right - a_left));
}

inline double logistic(double d) {
  if (!std::isfinite(d)) throw std::domain_error("logistic: non-finite input");
  return 1.0 / (1.0 + std::exp(-d));
}

// Disagreement between two preference probabilities: 0 when both equal
// 1/2 or both sit strictly on the same side of 1/2, else 1. Comparisons
// are exact by design.
inline int delta(double p, double q) {
  if (p == 0.5 && q == 0.5) return 0;
  if (p > 0.5 && q > 0.5) return 0;
  if (p < 0.5 && q < 0.5) return 0;
  return 1;
}

namespace detail {
// sum of a*log(a/b) over the two outcomes of a Bernoulli pair, with the
// 0*log 0 = 0 convention.
inline double kl_bernoulli(double p, double q) {
  double s = 0.0;
  if (p > 0.0) s += p * std::log(p / q);
  if (p < 1.0) s += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return s;
}
}  // namespace detail

// Jensen-Shannon divergence between Bernoulli(p1) and Bernoulli(p2),
// natural logarithm. Symmetric, zero iff p1 == p2, bounded by ln 2.
inline double jsd_bernoulli(double p1, double p2) {
  if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0)
    throw std::domain_error("jsd_bernoulli: probability out of [0,1]");
  if (p1 == p2) return 0.0;
  const double m = 0.5 * (p1 + p2);
  const double v = 0.5 * (detail::kl_bernoulli(p1, m) + detail::kl_bernoulli(p2, m));
  return std::max(0.0, v);
}

// Cross-entropy of predicted win probability p against label y in {0, 0.5, 1},
// with p clamped away from the log singularities.
inline double bt_cross_entropy(double p, double y) {
  p = std::clamp(p, kProbEps, 1.0 - kProbEps);
  double s = 0.0;
  if (y > 0.0) s -= y * std::log(p);
  if (y < 1.0) s -= (1.0 - y) * std::log(1.0 - p);
  return s;
}

}  // namespace vsl::pref
