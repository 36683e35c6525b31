#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <vector>

#include "bkb/kernels.hpp"
#include "bkb/rng.hpp"

namespace bkb {

/// Finite-arm reward environment: y = f(x_i) + xi * N(0, 1).
class Environment {
 public:
  Environment(ArmSet arms, Eigen::VectorXd f_values, double noise_xi);

  const ArmSet& arms() const { return arms_; }
  const Eigen::VectorXd& f_values() const { return f_; }
  double noise() const { return noise_; }
  std::size_t best_index() const { return best_; }
  double best_value() const { return f_(static_cast<Eigen::Index>(best_)); }

  /// f(x*) - f(x_arm).
  double gap(std::size_t arm) const;

  /// Noisy reward for `arm`. Consumes one normal draw from `rng` when the noise is nonzero.
  double observe(std::size_t arm, CounterRng& rng) const;

 private:
  ArmSet arms_;
  Eigen::VectorXd f_;
  double noise_;
  std::size_t best_ = 0;
};

/// Draws f ~ N(0, K_A + jitter I) through a Cholesky factor. If the factorization
/// fails the jitter is raised to 1e-10 kappa^2 and then multiplied by 10 up to
/// 1e-4 kappa^2 before giving up with std::runtime_error.
Eigen::VectorXd sample_gp_function(const KernelSpec& spec, const ArmSet& arms, double jitter, CounterRng& rng);

/// Smooth bump test function with its maximum at `center`.
Eigen::VectorXd bump_function(const ArmSet& arms, const Eigen::VectorXd& center, double width);

/// Evenly spaced 1-D grid on [low, high].
ArmSet grid_arms(std::size_t count, double low, double high);

/// Uniform random arms in [low, high]^dim.
ArmSet uniform_arms(std::size_t count, std::size_t dim, double low, double high, CounterRng& rng);

/// Variance-starvation demo setup: a GP draw on a 1-D grid with a Gaussian
/// kernel, evaluated only inside the left half of the interval.
struct StarvationSetup {
  static constexpr std::size_t kDefaultGrid = 512;
  static constexpr double kGamma = 100.0;
  static constexpr double kPoolHigh = 0.5;
  static constexpr std::array<std::size_t, 3> kCheckpoints{6, 63, 215};

  Environment env;
  KernelSpec kernel;
  std::vector<std::size_t> pool;  ///< arm indices with x <= 0.5
  std::array<std::size_t, 3> checkpoints;
  double spacing;
};

StarvationSetup fig1_environment(CounterRng& rng, std::size_t grid_size = StarvationSetup::kDefaultGrid,
                                 double noise_xi = 0.1);

}  // namespace bkb
