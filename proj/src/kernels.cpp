#include "bkb/kernels.hpp"

#include <algorithm>

namespace bkb {

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Linear: return "linear";
    case KernelFamily::Matern: return "matern";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "linear") return KernelFamily::Linear;
  if (name == "matern") return KernelFamily::Matern;
  throw std::invalid_argument("unknown kernel family '" + name + "'");
}

KernelSpec KernelSpec::gaussian(double gamma) {
  KernelSpec s{KernelFamily::Gaussian, gamma, 2.5, 1.0};
  s.validate();
  return s;
}

KernelSpec KernelSpec::linear() { return KernelSpec{KernelFamily::Linear, 1.0, 2.5, 1.0}; }

KernelSpec KernelSpec::matern(double nu, double lengthscale) {
  KernelSpec s{KernelFamily::Matern, 1.0, nu, lengthscale};
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  switch (family) {
    case KernelFamily::Gaussian:
      if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("kernel.gamma must be a positive finite number");
      break;
    case KernelFamily::Linear:
      break;
    case KernelFamily::Matern:
      if (nu != 0.5 && nu != 1.5 && nu != 2.5)
        throw std::invalid_argument("kernel.nu must be one of 0.5, 1.5, 2.5 (closed forms only)");
      if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
        throw std::invalid_argument("kernel.lengthscale must be a positive finite number");
      break;
  }
}

ArmSet::ArmSet(Eigen::MatrixXd arms) : arms_(std::move(arms)) {
  if (arms_.rows() < 1 || arms_.cols() < 1) throw std::invalid_argument("arm set must be nonempty");
  if (!arms_.allFinite()) throw std::invalid_argument("arm set contains non-finite entries");
}

double eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kernel eval: dimension mismatch");
  if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("kernel eval: non-finite input");
  return detail::eval_unchecked(spec, x, y);
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.cols() != Y.cols()) throw std::invalid_argument("gram: column counts differ");
  Eigen::MatrixXd K(X.rows(), Y.rows());
  for (Eigen::Index j = 0; j < Y.rows(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      K(i, j) = detail::eval_unchecked(spec, X.row(i), Y.row(j));
  return K;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = detail::eval_unchecked(spec, X.row(i), X.row(j));
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Eigen::VectorXd diagonal(const KernelSpec& spec, const Eigen::MatrixXd& X) {
  Eigen::VectorXd d(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) d(i) = detail::eval_unchecked(spec, X.row(i), X.row(i));
  return d;
}

double kappa_sq(const KernelSpec& spec, const ArmSet& arms) {
  if (arms.size() < 1) throw std::invalid_argument("kappa_sq: empty arm set");
  return diagonal(spec, arms.matrix()).maxCoeff();
}

}  // namespace bkb
