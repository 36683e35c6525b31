#pragma once

#include <Eigen/Core>
#include <cmath>
#include <iterator>
#include <stdexcept>
#include <string>

namespace bkb {

enum class KernelFamily { Gaussian, Linear, Matern };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

/// Covariance function family plus hyperparameters.
///
/// Gaussian: k(x, y) = exp(-gamma * |x - y|^2).
/// Linear:   k(x, y) = <x, y>.
/// Matern:   closed forms for nu in {1/2, 3/2, 5/2} with the given lengthscale.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double gamma = 1.0;
  double nu = 2.5;
  double lengthscale = 1.0;

  static KernelSpec gaussian(double gamma);
  static KernelSpec linear();
  static KernelSpec matern(double nu, double lengthscale);

  /// Throws std::invalid_argument on out-of-domain hyperparameters.
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

/// A fixed finite set of arms, one per row. Indices are stable.
class ArmSet {
 public:
  ArmSet() = default;
  explicit ArmSet(Eigen::MatrixXd arms);

  Eigen::Index size() const { return arms_.rows(); }
  Eigen::Index dim() const { return arms_.cols(); }
  const Eigen::MatrixXd& matrix() const { return arms_; }
  Eigen::VectorXd arm(Eigen::Index i) const { return arms_.row(i).transpose(); }

  /// Rows selected by index, in order (duplicates allowed).
  template <typename IndexRange>
  Eigen::MatrixXd rows(const IndexRange& indices) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(std::size(indices)), arms_.cols());
    Eigen::Index r = 0;
    for (auto i : indices) out.row(r++) = arms_.row(static_cast<Eigen::Index>(i));
    return out;
  }

 private:
  Eigen::MatrixXd arms_;
};

namespace detail {

template <typename DX, typename DY>
double eval_unchecked(const KernelSpec& spec, const Eigen::MatrixBase<DX>& x,
                      const Eigen::MatrixBase<DY>& y) {
  switch (spec.family) {
    case KernelFamily::Linear: {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) acc += x(i) * y(i);
      return acc;
    }
    case KernelFamily::Gaussian:
    case KernelFamily::Matern: {
      double sq = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double d = x(i) - y(i);
        sq += d * d;
      }
      if (spec.family == KernelFamily::Gaussian) return std::exp(-spec.gamma * sq);
      const double r = std::sqrt(sq) / spec.lengthscale;
      if (spec.nu == 0.5) return std::exp(-r);
      if (spec.nu == 1.5) {
        const double s = std::sqrt(3.0) * r;
        return (1.0 + s) * std::exp(-s);
      }
      const double s = std::sqrt(5.0) * r;
      return (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
  }
  return 0.0;
}

}  // namespace detail

/// k(x, y). Throws on dimension mismatch or non-finite input.
double eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// n x m matrix of k(X_i, Y_j). X == Y yields an exactly symmetric matrix.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// Symmetric Gram of X with itself.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X);

/// Diagonal k(x_i, x_i) for every row.
Eigen::VectorXd diagonal(const KernelSpec& spec, const Eigen::MatrixXd& X);

/// max_x k(x, x) over the arm set.
double kappa_sq(const KernelSpec& spec, const ArmSet& arms);

}  // namespace bkb
