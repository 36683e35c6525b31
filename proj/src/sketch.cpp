#include "bkb/sketch.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace bkb {

namespace {

double clamp_into(double v, double upper, std::size_t& clamped) {
  if (v < 0.0) {
    ++clamped;
    return 0.0;
  }
  if (v > upper) {
    ++clamped;
    return upper;
  }
  return v;
}

Eigen::VectorXd dict_cross(const EmbeddingMap& emb, const Eigen::VectorXd& x) {
  if (x.size() != emb.dict_arms.cols()) throw std::invalid_argument("embed: dimension mismatch");
  Eigen::VectorXd k(emb.size());
  for (Eigen::Index j = 0; j < emb.size(); ++j) k(j) = detail::eval_unchecked(emb.spec, emb.dict_arms.row(j), x);
  return k;
}

}  // namespace

EmbeddingMap build_embedding(const KernelSpec& spec, const Eigen::MatrixXd& dict_arms) {
  if (dict_arms.rows() < 1) throw std::invalid_argument("build_embedding: dictionary is empty");
  return build_embedding_from_gram(spec, dict_arms, gram(spec, dict_arms));
}

EmbeddingMap build_embedding_from_gram(const KernelSpec& spec, const Eigen::MatrixXd& dict_arms,
                                       const Eigen::MatrixXd& dict_gram) {
  const Eigen::Index m = dict_arms.rows();
  if (m < 1) throw std::invalid_argument("build_embedding: dictionary is empty");
  if (dict_gram.rows() != m || dict_gram.cols() != m)
    throw std::invalid_argument("build_embedding: Gram shape mismatch");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dict_gram);
  if (eig.info() != Eigen::Success) throw std::runtime_error("build_embedding: eigendecomposition failed");
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double cutoff = kTruncTol * std::max(vals.maxCoeff(), 0.0);

  Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(m);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (vals(i) > cutoff && vals(i) > 0.0) {
      inv_sqrt(i) = 1.0 / std::sqrt(vals(i));
      ++rank;
    }
  }
  const Eigen::MatrixXd& U = eig.eigenvectors();
  EmbeddingMap emb;
  emb.spec = spec;
  emb.dict_arms = dict_arms;
  emb.proj_factor = U * inv_sqrt.asDiagonal() * U.transpose();
  emb.rank = rank;
  return emb;
}

Eigen::VectorXd embed(const EmbeddingMap& emb, const Eigen::VectorXd& x) {
  return emb.proj_factor * dict_cross(emb, x);
}

Eigen::MatrixXd embed_cross(const EmbeddingMap& emb, const Eigen::MatrixXd& cross) {
  if (cross.cols() != emb.size()) throw std::invalid_argument("embed_cross: shape mismatch");
  return cross * emb.proj_factor;  // proj_factor is symmetric
}

double SketchState::logdet_ratio() const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v_chol.rows(); ++i) acc += std::log(v_chol(i, i));
  return std::max(0.0, 2.0 * acc - static_cast<double>(v_chol.rows()) * std::log(lambda));
}

SketchState rebuild_sketch(const EmbeddingMap& emb, std::span<const PulledArm> history, double lambda) {
  if (history.empty()) throw std::invalid_argument("rebuild_sketch: empty history");
  Eigen::MatrixXd cross(static_cast<Eigen::Index>(history.size()), emb.size());
  std::vector<double> counts, sums;
  for (std::size_t i = 0; i < history.size(); ++i) {
    cross.row(static_cast<Eigen::Index>(i)) = dict_cross(emb, history[i].x).transpose();
    counts.push_back(history[i].count);
    sums.push_back(history[i].reward_sum);
  }
  return rebuild_sketch_embedded(emb, embed_cross(emb, cross), counts, sums, lambda);
}

SketchState rebuild_sketch_embedded(EmbeddingMap emb, const Eigen::MatrixXd& embedded,
                                    std::span<const double> counts, std::span<const double> reward_sums,
                                    double lambda) {
  const Eigen::Index n = embedded.rows();
  if (static_cast<std::size_t>(n) != counts.size() || counts.size() != reward_sums.size())
    throw std::invalid_argument("rebuild_sketch: history length mismatch");
  if (embedded.cols() != emb.size()) throw std::invalid_argument("rebuild_sketch: embedding width mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("rebuild_sketch: lambda must be positive");

  SketchState st;
  st.lambda = lambda;
  st.pull_counts.assign(counts.begin(), counts.end());
  const Eigen::Map<const Eigen::VectorXd> c(counts.data(), n);
  const Eigen::Map<const Eigen::VectorXd> r(reward_sums.data(), n);
  st.zz = embedded.transpose() * c.asDiagonal() * embedded;
  st.zz = 0.5 * (st.zz + st.zz.transpose());
  st.zty = embedded.transpose() * r;
  Eigen::MatrixXd V = st.zz;
  V.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) throw std::runtime_error("rebuild_sketch: V is not positive definite");
  st.v_chol = llt.matrixL();
  st.emb = std::move(emb);
  return st;
}

Prediction predict(const SketchState& st, const Eigen::MatrixXd& embedded, const Eigen::VectorXd& prior_diag,
                   bool sor) {
  if (embedded.cols() != st.emb.size() || embedded.rows() != prior_diag.size())
    throw std::invalid_argument("sketch predict: shape mismatch");
  const auto L = st.v_chol.triangularView<Eigen::Lower>();
  Eigen::VectorXd coef = L.solve(st.zty);
  L.transpose().solveInPlace(coef);  // V^{-1} Z^T y

  Prediction out;
  out.mean = embedded * coef;
  const Eigen::MatrixXd W = L.solve(embedded.transpose());  // m x n
  const Eigen::VectorXd vinv_quad = W.colwise().squaredNorm().transpose();
  const Eigen::VectorXd z_sq = embedded.rowwise().squaredNorm();
  const double inv_lambda = 1.0 / st.lambda;
  out.variance.resize(prior_diag.size());
  for (Eigen::Index j = 0; j < prior_diag.size(); ++j) {
    // z^T Z^T Z V^{-1} z = |z|^2 - lambda z^T V^{-1} z
    const double upper = prior_diag(j) * inv_lambda;
    const double v = sor ? vinv_quad(j) : inv_lambda * (prior_diag(j) - z_sq(j)) + vinv_quad(j);
    out.variance(j) = clamp_into(v, upper, out.clamped);
  }
  return out;
}

namespace {

Prediction predict_one(const SketchState& st, const Eigen::VectorXd& x, bool sor) {
  const Eigen::MatrixXd z = embed(st.emb, x).transpose();
  Eigen::VectorXd prior(1);
  prior(0) = detail::eval_unchecked(st.emb.spec, x, x);
  return predict(st, z, prior, sor);
}

}  // namespace

double approx_mean(const SketchState& st, const Eigen::VectorXd& x) { return predict_one(st, x, false).mean(0); }

double approx_variance(const SketchState& st, const Eigen::VectorXd& x) {
  return predict_one(st, x, false).variance(0);
}

double sor_variance(const SketchState& st, const Eigen::VectorXd& x) { return predict_one(st, x, true).variance(0); }

double approx_ucb(const SketchState& st, const Eigen::VectorXd& x, double beta_tilde) {
  const Prediction p = predict_one(st, x, false);
  return p.mean(0) + beta_tilde * std::sqrt(p.variance(0));
}

}  // namespace bkb
