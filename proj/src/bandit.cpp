#include "bkb/bandit.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "bkb/gp_exact.hpp"
#include "bkb/sketch.hpp"

namespace bkb {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

/// State shared by both loops: history, counters, trace bookkeeping.
struct LoopState {
  const Environment& env;
  Trace trace;
  std::vector<double> counts;
  std::vector<double> reward_sums;
  double cum_regret = 0.0;
  double cached_sum = 0.0;

  LoopState(const Environment& e, std::string name)
      : env(e), counts(static_cast<std::size_t>(e.arms().size()), 0.0),
        reward_sums(static_cast<std::size_t>(e.arms().size()), 0.0) {
    trace.algorithm = std::move(name);
  }

  double pull(std::size_t arm, CounterRng& noise, std::size_t step) {
    double y;
    try {
      y = env.observe(arm, noise);
    } catch (const std::exception& ex) {
      throw std::runtime_error("environment failure at step " + std::to_string(step) + ": " + ex.what());
    }
    trace.history.push_back(arm);
    trace.rewards.push_back(y);
    counts[arm] += 1.0;
    reward_sums[arm] += y;
    return y;
  }

  TraceStep& record(std::size_t arm, double y) {
    TraceStep row;
    row.t = trace.history.size();
    row.arm = arm;
    row.reward = y;
    row.inst_regret = env.gap(arm);
    cum_regret += row.inst_regret;
    row.cum_regret = cum_regret;
    trace.steps.push_back(row);
    return trace.steps.back();
  }
};

std::size_t first_arm(const Environment& env, std::uint64_t seed) {
  CounterRng rng = CounterRng::stream(seed, Stream::FirstArm);
  return rng.uniform_index(static_cast<std::size_t>(env.arms().size()));
}

Eigen::VectorXd ucb_scores(const Prediction& pred, double beta) {
  return pred.mean + beta * pred.variance.array().sqrt().matrix();
}

double strict_sum(const std::vector<double>& counts, const Eigen::VectorXd& variance) {
  double acc = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a)
    if (counts[a] > 0.0) acc += counts[a] * variance(static_cast<Eigen::Index>(a));
  return acc;
}

}  // namespace

std::string to_string(BetaMode mode) {
  switch (mode) {
    case BetaMode::Adaptive: return "adaptive";
    case BetaMode::Fixed: return "fixed";
    case BetaMode::Exact: return "exact";
  }
  return "unknown";
}

std::string to_string(SumVarMode mode) { return mode == SumVarMode::Cached ? "cached" : "strict"; }

void BkbParams::validate() const {
  sampling.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("model.lambda must be positive");
  if (!(xi > 0.0) || !std::isfinite(xi)) throw std::invalid_argument("model.xi must be positive");
  if (!(F > 0.0) || !std::isfinite(F)) throw std::invalid_argument("model.F must be positive");
  if (beta_mode == BetaMode::Fixed && (!(fixed_beta >= 0.0) || !std::isfinite(fixed_beta)))
    throw std::invalid_argument("bkb.beta must be a nonnegative number");
}

double beta_tilde(std::size_t t, double sum_var, double kappa_sq, const BkbParams& params) {
  if (t < 1) throw std::invalid_argument("beta_tilde: t must be at least 1");
  if (!(sum_var >= 0.0)) throw std::invalid_argument("beta_tilde: sum_var must be nonnegative");
  const double kt = kappa_sq * static_cast<double>(t);
  const double theorem_log = std::log(kt);
  const double safe_log = 1.0 + std::log(kt + 1.0);
  const double log_term = (2.0 * theorem_log <= safe_log) ? safe_log : theorem_log;
  const double alpha = params.sampling.alpha();
  const double noise_part =
      2.0 * params.xi * std::sqrt(alpha * log_term * sum_var + std::log(1.0 / params.sampling.delta));
  const double bias_part = (1.0 + 1.0 / std::sqrt(1.0 - params.sampling.eps)) * std::sqrt(params.lambda) * params.F;
  return noise_part + bias_part;
}

std::size_t select_arm(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("select_arm: no scores");
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]))
      throw std::runtime_error("select_arm: non-finite score for arm " + std::to_string(i));
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

Trace run_bkb(const Environment& env, const KernelSpec& kernel, const BkbParams& params, std::size_t T,
              std::uint64_t seed, const StepObserver& observer) {
  params.validate();
  if (T < 1) throw std::invalid_argument("run_bkb: horizon must be at least 1");
  const ArmSet& arms = env.arms();
  const Eigen::MatrixXd K = gram(kernel, arms.matrix());
  const Eigen::VectorXd prior = K.diagonal();
  const double kappa2 = prior.maxCoeff();
  const double lambda = params.lambda;
  const bool sor = params.variance_form == VarianceForm::Sor;

  LoopState s(env, sor ? "sor_ablation" : (params.fixed_dictionary > 0 ? "fixed_dict" : "bkb"));
  CounterRng noise = CounterRng::stream(seed, Stream::Noise);

  auto t0 = Clock::now();
  const std::size_t x1 = first_arm(env, seed);
  const double y1 = s.pull(x1, noise, 1);
  Dictionary dict;
  dict.indices = {0};
  dict.probs = {1.0};
  {
    TraceStep& row = s.record(x1, y1);
    row.m = 1;
    row.selected_variance = prior(static_cast<Eigen::Index>(x1)) / lambda;
    s.cached_sum += row.selected_variance;
    row.step_ms = elapsed_ms(t0, Clock::now());
  }

  std::vector<Eigen::Index> dict_arms;
  std::vector<Eigen::Index> pulled;
  std::vector<double> pulled_counts, pulled_sums, hist_var;
  for (std::size_t t = 1; t < T; ++t) {
    const auto start = Clock::now();
    dict_arms.clear();
    for (std::size_t i : dict.indices) dict_arms.push_back(static_cast<Eigen::Index>(s.trace.history[i]));
    const Eigen::MatrixXd dict_gram = K(dict_arms, dict_arms);
    EmbeddingMap emb = build_embedding_from_gram(kernel, arms.rows(dict_arms), dict_gram);
    const Eigen::MatrixXd Z = embed_cross(emb, K(Eigen::all, dict_arms));

    pulled.clear();
    pulled_counts.clear();
    pulled_sums.clear();
    for (std::size_t a = 0; a < s.counts.size(); ++a) {
      if (s.counts[a] > 0.0) {
        pulled.push_back(static_cast<Eigen::Index>(a));
        pulled_counts.push_back(s.counts[a]);
        pulled_sums.push_back(s.reward_sums[a]);
      }
    }
    const SketchState st =
        rebuild_sketch_embedded(std::move(emb), Z(pulled, Eigen::all), pulled_counts, pulled_sums, lambda);
    const Prediction pred = predict(st, Z, prior, sor);

    const double strict = strict_sum(s.counts, pred.variance);
    const double sum_var = params.sum_var_mode == SumVarMode::Cached ? s.cached_sum : strict;
    double beta = params.fixed_beta;
    if (params.beta_mode == BetaMode::Adaptive) {
      beta = beta_tilde(t, sum_var, kappa2, params);
    } else if (params.beta_mode == BetaMode::Exact) {
      beta = std::sqrt(lambda) * params.F +
             params.xi * std::sqrt(2.0 * (st.logdet_ratio() + std::log(1.0 / params.sampling.delta)));
    }
    const Eigen::VectorXd scores = ucb_scores(pred, beta);

    double observer_ms = 0.0;
    if (observer) {
      const auto o0 = Clock::now();
      observer(StepView{t, s.trace.history, s.trace.rewards, pred.mean, pred.variance, beta, &dict});
      observer_ms = elapsed_ms(o0, Clock::now());
    }

    const std::size_t arm = select_arm(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
    const double y = s.pull(arm, noise, t + 1);
    const double selected_var = pred.variance(static_cast<Eigen::Index>(arm));

    if (params.fixed_dictionary > 0) {
      dict.indices.clear();
      const std::size_t m = std::min(params.fixed_dictionary, t + 1);
      for (std::size_t i = 0; i < m; ++i) dict.indices.push_back(i);
      dict.probs.assign(t + 1, 1.0);
      dict.fallback = false;
    } else {
      hist_var.resize(t + 1);
      for (std::size_t i = 0; i <= t; ++i) hist_var[i] = pred.variance(static_cast<Eigen::Index>(s.trace.history[i]));
      CounterRng draw = CounterRng::stream(seed, Stream::Dictionary, t);
      dict = resample(s.trace.history, hist_var, params.sampling, draw);
    }

    TraceStep& row = s.record(arm, y);
    row.m = dict.size();
    row.beta = beta;
    row.sum_var = sum_var;
    row.sum_var_cached = s.cached_sum;
    row.sum_var_strict = strict;
    row.selected_variance = selected_var;
    row.clamp_events = pred.clamped;
    row.fallback = dict.fallback;
    s.cached_sum += selected_var;
    s.trace.clamp_events += pred.clamped;
    s.trace.fallback_events += dict.fallback ? 1 : 0;
    row.step_ms = elapsed_ms(start, Clock::now()) - observer_ms;
  }
  s.trace.final_dictionary = dict;
  return std::move(s.trace);
}

Trace run_gpucb(const Environment& env, const KernelSpec& kernel, const BkbParams& params, std::size_t T,
                std::uint64_t seed, const StepObserver& observer) {
  params.validate();
  if (T < 1) throw std::invalid_argument("run_gpucb: horizon must be at least 1");
  const ArmSet& arms = env.arms();
  const Eigen::MatrixXd K = gram(kernel, arms.matrix());
  const Eigen::VectorXd prior = K.diagonal();
  const double lambda = params.lambda;

  LoopState s(env, "gpucb");
  CounterRng noise = CounterRng::stream(seed, Stream::Noise);
  ExactPosterior post(kernel, lambda);
  Eigen::MatrixXd cross(static_cast<Eigen::Index>(T), arms.size());

  auto t0 = Clock::now();
  const std::size_t x1 = first_arm(env, seed);
  const double y1 = s.pull(x1, noise, 1);
  post.update(arms.arm(static_cast<Eigen::Index>(x1)), y1);
  cross.row(0) = K.row(static_cast<Eigen::Index>(x1));
  {
    TraceStep& row = s.record(x1, y1);
    row.m = 1;
    row.selected_variance = prior(static_cast<Eigen::Index>(x1)) / lambda;
    row.post_variance = post.posterior_variance(arms.arm(static_cast<Eigen::Index>(x1)));
    s.cached_sum += row.selected_variance;
    row.step_ms = elapsed_ms(t0, Clock::now());
  }

  for (std::size_t t = 1; t < T; ++t) {
    const auto start = Clock::now();
    const Prediction pred = post.predict(cross.topRows(static_cast<Eigen::Index>(t)), prior);
    const double strict = strict_sum(s.counts, pred.variance);
    const double beta = params.beta_mode == BetaMode::Fixed
                            ? params.fixed_beta
                            : post.exact_beta(params.F, params.xi, params.sampling.delta);
    const Eigen::VectorXd scores = ucb_scores(pred, beta);

    double observer_ms = 0.0;
    if (observer) {
      const auto o0 = Clock::now();
      observer(StepView{t, s.trace.history, s.trace.rewards, pred.mean, pred.variance, beta, nullptr});
      observer_ms = elapsed_ms(o0, Clock::now());
    }

    const std::size_t arm = select_arm(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
    const double y = s.pull(arm, noise, t + 1);
    const Eigen::VectorXd x = arms.arm(static_cast<Eigen::Index>(arm));
    post.update(x, y);
    cross.row(static_cast<Eigen::Index>(t)) = K.row(static_cast<Eigen::Index>(arm));

    TraceStep& row = s.record(arm, y);
    row.m = t + 1;
    row.beta = beta;
    row.sum_var = s.cached_sum;
    row.sum_var_cached = s.cached_sum;
    row.sum_var_strict = strict;
    row.selected_variance = pred.variance(static_cast<Eigen::Index>(arm));
    row.post_variance = post.posterior_variance(x);
    row.clamp_events = pred.clamped;
    s.cached_sum += row.selected_variance;
    s.trace.clamp_events += pred.clamped;
    row.step_ms = elapsed_ms(start, Clock::now()) - observer_ms;
  }
  return std::move(s.trace);
}

}  // namespace bkb
