#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bkb/dictionary.hpp"
#include "bkb/environment.hpp"
#include "bkb/kernels.hpp"

namespace bkb {

/// How the confidence radius is chosen each step.
enum class BetaMode {
  Adaptive,  ///< BKB: data-adaptive radius from the summed sketched variances
  Fixed,     ///< constant override
  Exact,     ///< sqrt(lambda) F + xi sqrt(2 (logdet + log 1/delta)) from the current model
};

/// Which variance sum feeds the adaptive radius.
enum class SumVarMode {
  Cached,  ///< variances cached when each pulled arm was selected
  Strict,  ///< every pulled arm re-evaluated under the current sketch
};

enum class VarianceForm { Dtc, Sor };

std::string to_string(BetaMode mode);
std::string to_string(SumVarMode mode);

struct BkbParams {
  SamplingParams sampling;
  double lambda = 1.0;
  double xi = 1.0;
  double F = 1.0;
  BetaMode beta_mode = BetaMode::Adaptive;
  double fixed_beta = 1.0;
  SumVarMode sum_var_mode = SumVarMode::Cached;
  VarianceForm variance_form = VarianceForm::Dtc;
  /// When nonzero the dictionary is frozen to the first `fixed_dictionary` pulls (ablation).
  std::size_t fixed_dictionary = 0;

  void validate() const;
};

/// One row per pull. Row t describes the t-th pull and the dictionary S_t built after it.
struct TraceStep {
  std::size_t t = 0;
  std::size_t arm = 0;
  double reward = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  std::size_t m = 0;
  double beta = 0.0;            ///< radius used to select this arm (0 for the random first pull)
  double sum_var = 0.0;         ///< variance sum fed to the radius
  double sum_var_cached = 0.0;
  double sum_var_strict = 0.0;
  double selected_variance = 0.0;  ///< variance of the chosen arm when it was scored
  double post_variance = 0.0;      ///< exact runs: variance at the chosen arm after the update
  double step_ms = 0.0;
  std::size_t clamp_events = 0;
  bool fallback = false;
};

struct Trace {
  std::string algorithm;
  std::vector<TraceStep> steps;
  std::vector<std::size_t> history;  ///< arm index per pull
  std::vector<double> rewards;
  Dictionary final_dictionary;       ///< BKB only
  std::size_t clamp_events = 0;
  std::size_t fallback_events = 0;
};

/// Snapshot handed to an observer right after all arms are scored at step t.
struct StepView {
  std::size_t t;                        ///< pulls so far
  std::span<const std::size_t> history;
  std::span<const double> rewards;
  const Eigen::VectorXd& mean;
  const Eigen::VectorXd& variance;
  double beta;
  const Dictionary* dictionary;  ///< nullptr for exact runs
};

using StepObserver = std::function<void(const StepView&)>;

/// 2 xi sqrt(alpha L sum_var + log(1/delta)) + (1 + 1/sqrt(1 - eps)) sqrt(lambda) F with
/// L = log(kappa^2 t), or L = 1 + log(kappa^2 t + 1) whenever 2 log(kappa^2 t) <= 1 + log(kappa^2 t + 1).
double beta_tilde(std::size_t t, double sum_var, double kappa_sq, const BkbParams& params);

/// Lowest index attaining the maximum. Throws on a non-finite score, naming the arm.
std::size_t select_arm(std::span<const double> scores);

/// Budgeted kernel bandit. The first arm is uniform at random; each later step
/// rebuilds the embedding from S_t, scores every arm, pulls the argmax and
/// resamples S_{t+1} from all pulled arms.
Trace run_bkb(const Environment& env, const KernelSpec& kernel, const BkbParams& params, std::size_t T,
              std::uint64_t seed, const StepObserver& observer = {});

/// Exact GP-UCB with the same first pull and noise stream as run_bkb for a given seed.
/// Uses BetaMode::Fixed when requested, otherwise the exact radius.
Trace run_gpucb(const Environment& env, const KernelSpec& kernel, const BkbParams& params, std::size_t T,
                std::uint64_t seed, const StepObserver& observer = {});

}  // namespace bkb
