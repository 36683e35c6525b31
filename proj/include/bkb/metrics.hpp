#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bkb/bandit.hpp"
#include "bkb/dictionary.hpp"
#include "bkb/environment.hpp"
#include "bkb/kernels.hpp"

namespace bkb {

/// Tr(K (K + lambda I)^{-1}) = sum_i ev_i / (ev_i + lambda), from a full eigendecomposition.
double effective_dimension(const Eigen::MatrixXd& K, double lambda);

/// d_eff <= sum_s sigma_s^2(x_s) <= logdet(K/lambda + I) <= d_eff (1 + log(|K|/lambda + 1)).
struct ChainReport {
  double deff = 0.0;
  double sum_var = 0.0;
  double logdet = 0.0;
  double upper = 0.0;
  double slack_deff_sumvar = 0.0;    ///< sum_var - deff
  double slack_sumvar_logdet = 0.0;  ///< logdet - sum_var
  double slack_logdet_upper = 0.0;   ///< upper - logdet
  bool deff_le_sumvar = false;
  bool sumvar_le_logdet = false;
  bool logdet_le_upper = false;

  double min_slack() const;
  bool holds() const { return deff_le_sumvar && sumvar_le_logdet && logdet_le_upper; }
};

/// `per_step_variances[s]` is the posterior variance at the s-th selected arm just after it was added.
ChainReport logdet_deff_chain(const Eigen::MatrixXd& K, double lambda, std::span<const double> per_step_variances,
                              double tol = 1e-10);

/// Finite-dimensional check of A/alpha <= A_tilde <= alpha A for the linear kernel.
struct SandwichReport {
  double min_ratio = 0.0;  ///< smallest generalized eigenvalue of (A_tilde, A)
  double max_ratio = 0.0;
  bool within = false;     ///< [min, max] inside [1/alpha, alpha]
  double accuracy_norm = 0.0;  ///< |A^{-1/2}(X^T S S^T X - X^T X)A^{-1/2}| with 1/sqrt(p) weights
  bool eps_accurate = false;
};

/// `history` holds the t pulled arms as rows; `dict` indexes into it with its inclusion probabilities.
SandwichReport linear_oracle_sandwich(const KernelSpec& spec, const Eigen::MatrixXd& history, const Dictionary& dict,
                                      double lambda, double eps);

/// Prefix sums of f(x*) - f(x_t).
std::vector<double> cumulative_regret(const Trace& trace, const Environment& env);

/// Every step satisfies sigma_t^2 <= sigma_{t-1}^2 and sigma_{t-1}^2 / (kappa^2/lambda + 1) <= sigma_t^2
/// at the newly selected arm. Uses the selected/post variances of an exact trace.
struct MonotonicityReport {
  std::size_t steps = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;
};

MonotonicityReport check_monotonicity(const Trace& exact_trace, double kappa_sq, double lambda, double tol = 1e-10);

/// Sketched vs exact variances along one BKB run, plus the dictionary size bound.
struct AccuracyReport {
  std::vector<double> min_ratio;    ///< per scoring step: min over arms of sigma_tilde^2 / sigma^2
  std::vector<double> max_ratio;
  std::vector<std::size_t> violations;  ///< arms outside [1/alpha, alpha] per step
  std::vector<std::size_t> m;           ///< dictionary size after each pull (length T)
  std::vector<double> deff;             ///< d_eff(lambda, X_t) after each pull
  std::vector<double> logdet;           ///< logdet(K_t/lambda + I) after each pull
  std::vector<double> size_bound;       ///< 3 (1 + kappa^2/lambda) alpha qbar d_eff
  std::size_t total_violations = 0;
  std::size_t size_violations = 0;
  double alpha = 1.0;

  bool accuracy_failed() const { return total_violations > 0; }
};

AccuracyReport verify_accuracy_run(const Environment& env, const KernelSpec& kernel, const BkbParams& params,
                                   std::size_t T, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

}  // namespace bkb
