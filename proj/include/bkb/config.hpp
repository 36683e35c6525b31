#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bkb/bandit.hpp"
#include "bkb/environment.hpp"
#include "bkb/kernels.hpp"

namespace bkb {

/// Configuration problem tied to one dotted key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class QbarMode { Theorem, Override, Infinite };
enum class ArmsKind { Grid, Uniform, File };
enum class EnvKind { Gp, Bump };

struct AlgorithmSpec {
  enum class Kind { Bkb, Gpucb, SorAblation, FixedDict } kind = Kind::Bkb;
  std::size_t dict_size = 0;  ///< FixedDict only

  std::string name() const;
};

/// One experiment grid: every algorithm is run for every seed.
///
/// The file format is flat `key = value` lines with dotted keys; `#` starts a comment.
struct ExperimentConfig {
  KernelSpec kernel = KernelSpec::gaussian(100.0);

  ArmsKind arms_kind = ArmsKind::Grid;
  std::size_t arms_count = 100;
  std::size_t arms_dim = 1;
  double arms_low = 0.0;
  double arms_high = 1.0;
  std::filesystem::path arms_file;
  std::optional<std::uint64_t> arms_seed;

  EnvKind env_kind = EnvKind::Gp;
  double env_noise = 0.1;
  double env_jitter = 1e-10;
  double env_bump_width = 0.1;

  std::size_t horizon = 200;
  double lambda = 0.01;
  double xi = 0.1;
  double F = 1.0;
  double eps = 0.5;
  double delta = 0.1;
  QbarMode qbar_mode = QbarMode::Theorem;
  double qbar_override = 4.0;

  BetaMode bkb_beta_mode = BetaMode::Adaptive;
  double bkb_beta = 1.0;
  SumVarMode sum_var_mode = SumVarMode::Cached;
  BetaMode gpucb_beta_mode = BetaMode::Exact;
  double gpucb_beta = 1.0;

  std::vector<AlgorithmSpec> algorithms{AlgorithmSpec{}};
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir = "out";

  std::size_t starvation_grid = StarvationSetup::kDefaultGrid;
  double starvation_noise = 0.1;
  double starvation_qbar = 4.0;

  /// Effective qbar for the configured mode and horizon.
  double qbar() const;

  /// Parameters for one algorithm cell.
  BkbParams params_for(const AlgorithmSpec& alg, std::uint64_t seed) const;

  /// Arms and reward function for a seed.
  Environment make_environment(std::uint64_t seed) const;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Parses `key = value` text. Unknown keys and malformed values raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parsed seed list: "3", "1,2,5" or an inclusive range "0..19".
std::vector<std::uint64_t> parse_seeds(const std::string& text);

}  // namespace bkb
