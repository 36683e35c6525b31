#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "bkb/gp_exact.hpp"
#include "bkb/kernels.hpp"

namespace bkb {

/// Eigenvalues of K_S at or below trunc_tol * max eigenvalue are dropped from the pseudo-inverse.
inline constexpr double kTruncTol = 1e-12;

/// Nystrom coordinate map z(x) = (K_S^{1/2})^+ k_S(x) for a dictionary S.
struct EmbeddingMap {
  KernelSpec spec;
  Eigen::MatrixXd dict_arms;    ///< m x d
  Eigen::MatrixXd proj_factor;  ///< m x m, symmetric
  Eigen::Index rank = 0;

  Eigen::Index size() const { return dict_arms.rows(); }
};

EmbeddingMap build_embedding(const KernelSpec& spec, const Eigen::MatrixXd& dict_arms);

/// Same as build_embedding but reuses an already evaluated K_S.
EmbeddingMap build_embedding_from_gram(const KernelSpec& spec, const Eigen::MatrixXd& dict_arms,
                                       const Eigen::MatrixXd& dict_gram);

Eigen::VectorXd embed(const EmbeddingMap& emb, const Eigen::VectorXd& x);

/// Embeds many points at once given their n x m cross-kernel block k(x_i, s_j).
Eigen::MatrixXd embed_cross(const EmbeddingMap& emb, const Eigen::MatrixXd& cross);

/// One distinct pulled arm with its multiplicity and summed rewards.
struct PulledArm {
  Eigen::VectorXd x;
  double count = 0.0;
  double reward_sum = 0.0;
};

/// Sketched posterior: V = Z^T Z + lambda I built from pull counters.
struct SketchState {
  EmbeddingMap emb;
  Eigen::MatrixXd zz;      ///< Z^T Z, m x m
  Eigen::VectorXd zty;     ///< Z^T y
  Eigen::MatrixXd v_chol;  ///< lower factor of zz + lambda I
  double lambda = 1.0;
  std::vector<double> pull_counts;

  /// logdet(V / lambda) = logdet(K_t / lambda + I) when the dictionary spans the history.
  double logdet_ratio() const;
};

SketchState rebuild_sketch(const EmbeddingMap& emb, std::span<const PulledArm> history, double lambda);

/// Rebuild from pre-embedded pulled arms (rows of `embedded`, aligned with counts and reward sums).
SketchState rebuild_sketch_embedded(EmbeddingMap emb, const Eigen::MatrixXd& embedded,
                                    std::span<const double> counts, std::span<const double> reward_sums,
                                    double lambda);

double approx_mean(const SketchState& st, const Eigen::VectorXd& x);

/// DTC variance (k(x,x) - z^T Z^T Z V^{-1} z) / lambda, clamped to [0, k(x,x)/lambda].
double approx_variance(const SketchState& st, const Eigen::VectorXd& x);

double approx_ucb(const SketchState& st, const Eigen::VectorXd& x, double beta_tilde);

/// Subset-of-regressors variance: k(x,x) replaced by |z(x)|^2. Starves far from the dictionary.
double sor_variance(const SketchState& st, const Eigen::VectorXd& x);

/// Batch evaluation over embedded points (rows of `embedded`) with prior diagonal k(x,x).
/// When `sor` is set, variances use the subset-of-regressors form.
Prediction predict(const SketchState& st, const Eigen::MatrixXd& embedded, const Eigen::VectorXd& prior_diag,
                   bool sor = false);

}  // namespace bkb
