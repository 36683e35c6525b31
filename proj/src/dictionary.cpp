#include "bkb/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bkb {

namespace {

double inclusion_probability(double variance, double qbar) {
  if (qbar == std::numeric_limits<double>::infinity()) return 1.0;
  return std::clamp(qbar * variance, 0.0, 1.0);
}

}  // namespace

double qbar_floor(double eps, double delta, std::size_t horizon) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const double alpha = (1.0 + eps) / (1.0 - eps);
  return 6.0 * alpha * std::log(4.0 * static_cast<double>(horizon) / delta) / (eps * eps);
}

bool SamplingParams::theorem_valid() const { return qbar >= qbar_floor(eps, delta, horizon); }

void SamplingParams::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("sampling.eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("sampling.delta must lie in (0,1)");
  if (horizon < 1) throw std::invalid_argument("sampling.horizon must be at least 1");
  if (!(qbar > 0.0) || std::isnan(qbar)) throw std::invalid_argument("sampling.qbar must be positive");
}

Dictionary resample(std::span<const std::size_t> history_arms, std::span<const double> variances,
                    const SamplingParams& params, CounterRng& rng) {
  if (history_arms.size() != variances.size())
    throw std::invalid_argument("resample: history and variance lengths differ");
  if (variances.empty()) throw std::invalid_argument("resample: empty history");
  Dictionary dict;
  dict.probs.reserve(variances.size());
  for (std::size_t i = 0; i < variances.size(); ++i) {
    if (!(variances[i] >= 0.0)) throw std::invalid_argument("resample: variances must be nonnegative");
    const double p = inclusion_probability(variances[i], params.qbar);
    dict.probs.push_back(p);
    if (rng.bernoulli(p)) dict.indices.push_back(i);
  }
  if (dict.indices.empty()) {
    dict.indices.push_back(variances.size() - 1);
    dict.fallback = true;
  }
  return dict;
}

double expected_size(std::span<const double> variances, double qbar) {
  double acc = 0.0;
  for (double v : variances) acc += inclusion_probability(v, qbar);
  return acc;
}

}  // namespace bkb
