#include "bkb/environment.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace bkb {

Environment::Environment(ArmSet arms, Eigen::VectorXd f_values, double noise_xi)
    : arms_(std::move(arms)), f_(std::move(f_values)), noise_(noise_xi) {
  if (f_.size() != arms_.size()) throw std::invalid_argument("Environment: f_values length differs from arm count");
  if (!f_.allFinite()) throw std::invalid_argument("Environment: f_values must be finite");
  if (!(noise_xi >= 0.0) || !std::isfinite(noise_xi))
    throw std::invalid_argument("Environment: noise must be nonnegative");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < f_.size(); ++i)
    if (f_(i) > f_(best)) best = i;  // lowest index wins ties
  best_ = static_cast<std::size_t>(best);
}

double Environment::gap(std::size_t arm) const {
  if (arm >= static_cast<std::size_t>(f_.size())) throw std::out_of_range("Environment: arm index out of range");
  return best_value() - f_(static_cast<Eigen::Index>(arm));
}

double Environment::observe(std::size_t arm, CounterRng& rng) const {
  if (arm >= static_cast<std::size_t>(f_.size())) throw std::out_of_range("Environment: arm index out of range");
  const double f = f_(static_cast<Eigen::Index>(arm));
  if (noise_ == 0.0) return f;
  return f + noise_ * rng.normal();
}

Eigen::VectorXd sample_gp_function(const KernelSpec& spec, const ArmSet& arms, double jitter, CounterRng& rng) {
  if (!(jitter >= 0.0)) throw std::invalid_argument("sample_gp_function: jitter must be nonnegative");
  const Eigen::MatrixXd K = gram(spec, arms.matrix());
  const double kappa2 = K.diagonal().maxCoeff();
  const double max_jitter = 1e-4 * kappa2;
  double j = jitter;
  while (true) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd z(arms.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
      return llt.matrixL() * z;
    }
    const double next = std::max(j * 10.0, 1e-10 * kappa2);
    if (next > max_jitter * (1.0 + 1e-12))
      throw std::runtime_error("sample_gp_function: Gram matrix not factorizable with jitter up to 1e-4 kappa^2");
    j = next;
  }
}

Eigen::VectorXd bump_function(const ArmSet& arms, const Eigen::VectorXd& center, double width) {
  if (center.size() != arms.dim()) throw std::invalid_argument("bump_function: center dimension mismatch");
  Eigen::VectorXd f(arms.size());
  for (Eigen::Index i = 0; i < arms.size(); ++i)
    f(i) = std::exp(-(arms.matrix().row(i) - center.transpose()).squaredNorm() / (2.0 * width * width));
  return f;
}

ArmSet grid_arms(std::size_t count, double low, double high) {
  if (count < 1) throw std::invalid_argument("grid_arms: count must be at least 1");
  if (!(high >= low)) throw std::invalid_argument("grid_arms: high must not be below low");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(count), 1);
  if (count == 1) {
    X(0, 0) = low;
  } else {
    const double step = (high - low) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) X(static_cast<Eigen::Index>(i), 0) = low + step * static_cast<double>(i);
    X(static_cast<Eigen::Index>(count - 1), 0) = high;
  }
  return ArmSet(std::move(X));
}

ArmSet uniform_arms(std::size_t count, std::size_t dim, double low, double high, CounterRng& rng) {
  if (count < 1 || dim < 1) throw std::invalid_argument("uniform_arms: count and dim must be positive");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = low + (high - low) * rng.uniform();
  return ArmSet(std::move(X));
}

StarvationSetup fig1_environment(CounterRng& rng, std::size_t grid_size, double noise_xi) {
  if (grid_size < 2) throw std::invalid_argument("fig1_environment: grid needs at least 2 points");
  ArmSet arms = grid_arms(grid_size, 0.0, 1.0);
  const KernelSpec kernel = KernelSpec::gaussian(StarvationSetup::kGamma);
  Eigen::VectorXd f = sample_gp_function(kernel, arms, 1e-10, rng);
  std::vector<std::size_t> pool;
  for (Eigen::Index i = 0; i < arms.size(); ++i)
    if (arms.matrix()(i, 0) <= StarvationSetup::kPoolHigh) pool.push_back(static_cast<std::size_t>(i));
  const double spacing = 1.0 / static_cast<double>(grid_size - 1);
  return StarvationSetup{Environment(std::move(arms), std::move(f), noise_xi), kernel, std::move(pool),
                         StarvationSetup::kCheckpoints, spacing};
}

}  // namespace bkb
