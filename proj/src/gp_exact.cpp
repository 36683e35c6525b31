#include "bkb/gp_exact.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bkb {

namespace {

double clamp_variance(double v, double upper, std::size_t& clamped) {
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

}  // namespace

ExactPosterior::ExactPosterior(KernelSpec spec, double lambda) : spec_(spec), lambda_(lambda) {
  spec_.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("ExactPosterior: lambda must be positive");
}

void ExactPosterior::reserve(std::size_t n) {
  const auto cap = static_cast<Eigen::Index>(chol_.rows());
  if (static_cast<Eigen::Index>(n) <= cap) return;
  const Eigen::Index new_cap = std::max<Eigen::Index>(16, std::max<Eigen::Index>(2 * cap, n));
  const auto t = static_cast<Eigen::Index>(t_);
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(new_cap, new_cap);
  chol.topLeftCorner(t, t) = chol_.topLeftCorner(t, t);
  chol_.swap(chol);
  Eigen::MatrixXd inputs(new_cap, inputs_.cols());
  inputs.topRows(t) = inputs_.topRows(t);
  inputs_.swap(inputs);
  Eigen::VectorXd y(new_cap);
  y.head(t) = y_.head(t);
  y_.swap(y);
}

Eigen::VectorXd ExactPosterior::cross_vector(const Eigen::VectorXd& x) const {
  const auto t = static_cast<Eigen::Index>(t_);
  Eigen::VectorXd k(t);
  for (Eigen::Index s = 0; s < t; ++s) k(s) = detail::eval_unchecked(spec_, inputs_.row(s), x);
  return k;
}

void ExactPosterior::update(const Eigen::VectorXd& x, double y) {
  if (!x.allFinite()) throw std::invalid_argument("ExactPosterior::update: non-finite arm");
  if (!std::isfinite(y)) throw std::invalid_argument("ExactPosterior::update: non-finite reward");
  if (t_ > 0 && x.size() != inputs_.cols())
    throw std::invalid_argument("ExactPosterior::update: dimension mismatch");
  if (t_ == 0) inputs_.resize(0, x.size());

  const Eigen::VectorXd k = cross_vector(x);
  const double kxx = detail::eval_unchecked(spec_, x, x);
  reserve(t_ + 1);
  const auto t = static_cast<Eigen::Index>(t_);
  inputs_.row(t) = x.transpose();
  y_(t) = y;

  if (++since_rebuild_ >= kRebuildInterval) {
    ++t_;
    rebuild();
    since_rebuild_ = 0;
  } else {
    Eigen::VectorXd row = k;
    if (t > 0) chol_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(row);
    const double pivot = kxx + lambda_ - row.squaredNorm();
    // pivot >= lambda in exact arithmetic
    chol_.row(t).head(t) = row.transpose();
    chol_(t, t) = std::sqrt(std::max(pivot, lambda_ * 1e-12));
    ++t_;
  }
  refresh_weights();
}

void ExactPosterior::rebuild() {
  const auto t = static_cast<Eigen::Index>(t_);
  Eigen::MatrixXd K = gram(spec_, inputs_.topRows(t));
  K.diagonal().array() += lambda_;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw std::runtime_error("ExactPosterior: Cholesky rebuild failed");
  chol_.topLeftCorner(t, t) = llt.matrixL();
  chol_.topLeftCorner(t, t).triangularView<Eigen::StrictlyUpper>().setZero();
}

void ExactPosterior::refresh_weights() {
  const auto t = static_cast<Eigen::Index>(t_);
  weights_ = y_.head(t);
  const auto L = chol_.topLeftCorner(t, t);
  L.triangularView<Eigen::Lower>().solveInPlace(weights_);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(weights_);
}

double ExactPosterior::posterior_mean(const Eigen::VectorXd& x) const {
  if (t_ == 0) return 0.0;
  return cross_vector(x).dot(weights_);
}

double ExactPosterior::posterior_variance(const Eigen::VectorXd& x) const {
  const double kxx = detail::eval_unchecked(spec_, x, x);
  std::size_t clamped = 0;
  if (t_ == 0) return clamp_variance(kxx / lambda_, kxx / lambda_, clamped);
  const auto t = static_cast<Eigen::Index>(t_);
  Eigen::VectorXd w = cross_vector(x);
  chol_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(w);
  return clamp_variance((kxx - w.squaredNorm()) / lambda_, kxx / lambda_, clamped);
}

double ExactPosterior::ucb_score(const Eigen::VectorXd& x, double beta) const {
  return posterior_mean(x) + beta * std::sqrt(posterior_variance(x));
}

double ExactPosterior::logdet_ratio() const {
  const auto t = static_cast<Eigen::Index>(t_);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) acc += std::log(chol_(i, i));
  return std::max(0.0, 2.0 * acc - static_cast<double>(t) * std::log(lambda_));
}

double ExactPosterior::exact_beta(double F, double xi, double delta) const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("exact_beta: delta must lie in (0,1)");
  return std::sqrt(lambda_) * F + xi * std::sqrt(2.0 * (logdet_ratio() + std::log(1.0 / delta)));
}

Prediction ExactPosterior::predict(const Eigen::Ref<const Eigen::MatrixXd>& cross,
                                   const Eigen::VectorXd& prior_diag) const {
  const auto t = static_cast<Eigen::Index>(t_);
  if (cross.rows() != t || cross.cols() != prior_diag.size())
    throw std::invalid_argument("ExactPosterior::predict: shape mismatch");
  Prediction out;
  const Eigen::Index n = prior_diag.size();
  out.variance.resize(n);
  if (t == 0) {
    out.mean = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j)
      out.variance(j) = clamp_variance(prior_diag(j) / lambda_, prior_diag(j) / lambda_, out.clamped);
    return out;
  }
  out.mean = cross.transpose() * weights_;
  const Eigen::MatrixXd W = chol_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solve(cross);
  const Eigen::VectorXd explained = W.colwise().squaredNorm().transpose();
  for (Eigen::Index j = 0; j < n; ++j)
    out.variance(j) = clamp_variance((prior_diag(j) - explained(j)) / lambda_, prior_diag(j) / lambda_,
                                     out.clamped);
  return out;
}

Eigen::MatrixXd ExactPosterior::factor() const {
  const auto t = static_cast<Eigen::Index>(t_);
  return chol_.topLeftCorner(t, t);
}

}  // namespace bkb
