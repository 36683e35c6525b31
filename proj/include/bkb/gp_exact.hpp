#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "bkb/kernels.hpp"

namespace bkb {

/// Mean and variance for a batch of test points.
struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  std::size_t clamped = 0;  ///< entries clamped into [0, k(x,x)/lambda]
};

/// Exact GP posterior over the selected-arm history.
///
/// Variances use the feature-space scale
///   sigma_t^2(x) = (k(x,x) - k_t(x)^T (K_t + lambda I)^{-1} k_t(x)) / lambda,
/// i.e. the ridge leverage score of x, so that exact and sketched variances are
/// directly comparable.
///
/// The Cholesky factor of K_t + lambda I is extended by one row per update and
/// rebuilt from scratch every kRebuildInterval updates.
class ExactPosterior {
 public:
  static constexpr std::size_t kRebuildInterval = 256;

  ExactPosterior(KernelSpec spec, double lambda);

  void update(const Eigen::VectorXd& x, double y);

  std::size_t size() const { return t_; }
  double lambda() const { return lambda_; }
  const KernelSpec& kernel() const { return spec_; }

  double posterior_mean(const Eigen::VectorXd& x) const;
  double posterior_variance(const Eigen::VectorXd& x) const;
  double ucb_score(const Eigen::VectorXd& x, double beta) const;

  /// logdet(K_t / lambda + I).
  double logdet_ratio() const;

  /// sqrt(lambda) F + xi sqrt(2 (logdet(K_t/lambda + I) + log(1/delta))).
  double exact_beta(double F, double xi, double delta) const;

  /// Batch prediction. `cross` is t x n with entries k(x_s, z_j); `prior_diag` holds k(z_j, z_j).
  Prediction predict(const Eigen::Ref<const Eigen::MatrixXd>& cross, const Eigen::VectorXd& prior_diag) const;

  /// Lower-triangular factor of K_t + lambda I (t x t copy).
  Eigen::MatrixXd factor() const;
  Eigen::MatrixXd inputs() const { return inputs_.topRows(static_cast<Eigen::Index>(t_)); }
  Eigen::VectorXd rewards() const { return y_.head(static_cast<Eigen::Index>(t_)); }

 private:
  Eigen::VectorXd cross_vector(const Eigen::VectorXd& x) const;
  void refresh_weights();
  void rebuild();
  void reserve(std::size_t n);

  KernelSpec spec_;
  double lambda_;
  std::size_t t_ = 0;
  std::size_t since_rebuild_ = 0;
  Eigen::MatrixXd inputs_;  // capacity x d
  Eigen::VectorXd y_;       // capacity
  Eigen::MatrixXd chol_;    // capacity x capacity, lower t x t block in use
  Eigen::VectorXd weights_; // (K_t + lambda I)^{-1} y_t
};

}  // namespace bkb
