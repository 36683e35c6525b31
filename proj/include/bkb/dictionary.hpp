#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bkb/rng.hpp"

namespace bkb {

/// Resampling parameters. qbar may be +infinity, which keeps every pulled arm.
struct SamplingParams {
  double eps = 0.5;
  double delta = 0.1;
  std::size_t horizon = 1;
  double qbar = 1.0;
  std::uint64_t rng_seed = 0;

  double alpha() const { return (1.0 + eps) / (1.0 - eps); }
  bool infinite() const { return qbar == std::numeric_limits<double>::infinity(); }

  /// True when qbar meets the oversampling floor for (eps, delta, horizon).
  bool theorem_valid() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// 6 alpha log(4T/delta) / eps^2 with alpha = (1+eps)/(1-eps).
double qbar_floor(double eps, double delta, std::size_t horizon);

/// Inducing points as positions into the pull history, with the inclusion
/// probability used for every history position at the last resample.
struct Dictionary {
  std::vector<std::size_t> indices;
  std::vector<double> probs;
  bool fallback = false;  ///< no index was drawn; the newest position was forced in

  std::size_t size() const { return indices.size(); }
};

/// Draws q_i ~ Bernoulli(min(1, qbar * variances[i])) independently for every
/// history position i in ascending order, one rng draw per position.
/// `history_arms` and `variances` must have the same length.
Dictionary resample(std::span<const std::size_t> history_arms, std::span<const double> variances,
                    const SamplingParams& params, CounterRng& rng);

/// sum_i min(1, qbar * variances[i]).
double expected_size(std::span<const double> variances, double qbar);

}  // namespace bkb
