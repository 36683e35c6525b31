#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bkb/bandit.hpp"
#include "bkb/config.hpp"
#include "bkb/metrics.hpp"

namespace bkb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Command-line overrides shared by every subcommand.
struct CliOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> output;
  std::size_t workers = 1;
  std::uint64_t seed_offset = 0;
};

/// Reads BKB_KIT_LOG (error, info or debug) and routes logging to stderr.
void configure_logging();

inline constexpr const char* kTraceSchema = "# bkb_kit trace v1";
inline constexpr const char* kSummarySchema = "# bkb_kit summary v1";

/// Trace CSV text. Without timing, the step_ms column is written as 0.
std::string trace_csv(const Trace& trace, bool with_timing = true);

/// One finished (algorithm, seed) cell.
struct CellResult {
  AlgorithmSpec algorithm;
  std::uint64_t seed = 0;
  std::size_t arms = 0;
  Trace trace;
  double total_ms = 0.0;
};

std::string summary_csv(std::span<const CellResult> cells);
std::string trace_file_name(const CellResult& cell);

/// Runs one cell against a prebuilt environment.
Trace run_cell(const ExperimentConfig& cfg, const AlgorithmSpec& alg, std::uint64_t seed, const Environment& env);

/// Runs every (algorithm x seed) cell on a bounded worker pool. Results come back in
/// cell order (seeds outer, algorithms inner). The first failing cell is rethrown as
/// std::runtime_error naming the algorithm and seed.
std::vector<CellResult> run_grid(const ExperimentConfig& cfg, std::size_t workers, std::uint64_t seed_offset);

/// Sketch fitted to passive evaluations at one checkpoint of the starvation demo.
/// Standard deviations are square roots of the lambda-scaled variances.
struct StarvationCheckpoint {
  std::uint64_t seed = 0;
  std::size_t t = 0;
  std::size_t m = 0;
  double lambda = 1.0;
  double alpha = 3.0;
  Eigen::VectorXd x;
  Eigen::VectorXd f;
  Eigen::VectorXd mu_tilde;
  Eigen::VectorXd sigma_tilde;
  Eigen::VectorXd sigma_exact;
  Eigen::VectorXd sigma_sor;
  std::size_t dict_outside_pool = 0;  ///< dictionary points with x above the pool edge

  /// Fraction of grid points with |f - mu_tilde| <= 3 sqrt(lambda) sigma_tilde.
  double coverage() const;
};

struct StarvationOptions {
  std::size_t grid = StarvationSetup::kDefaultGrid;
  double noise = 0.1;
  double qbar = 4.0;
  double eps = 0.5;
};

std::vector<StarvationCheckpoint> run_starvation(std::uint64_t seed, const StarvationOptions& opts);
std::string starvation_csv(const StarvationCheckpoint& cp);

/// Everything cmd_verify reports for one seed.
struct VerifySeed {
  std::uint64_t seed = 0;
  AccuracyReport accuracy;
  MonotonicityReport monotonicity;
  std::vector<std::size_t> chain_t;
  std::vector<ChainReport> chain;
  std::optional<SandwichReport> sandwich;
};

struct VerifyResult {
  std::vector<VerifySeed> seeds;
  std::size_t failed_runs = 0;
  std::size_t size_violations = 0;
  std::size_t monotonicity_violations = 0;
  std::size_t chain_failures = 0;
  std::size_t sandwich_runs = 0;
  std::size_t sandwich_within = 0;
};

inline constexpr std::size_t kChainCheckpoints[] = {10, 50, 100, 200};

VerifyResult run_verify(const ExperimentConfig& cfg, std::size_t workers, std::uint64_t seed_offset);

/// Per-step timings of BKB and GP-UCB on one environment.
struct BenchResult {
  std::size_t arms = 0;
  std::size_t horizon = 0;
  std::size_t repeats = 0;
  std::vector<double> bkb_ms;    ///< per step, minimum over repeats
  std::vector<double> gpucb_ms;
  std::vector<std::size_t> bkb_m;
  std::size_t fit_lo = 0;
  std::size_t fit_hi = 0;
  double gpucb_exponent = 0.0;
  double bkb_exponent = 0.0;
  std::size_t burn_in = 0;  ///< 4 m_T
  double bkb_median_ms = 0.0;
  double bkb_max_ratio = 0.0;  ///< max over steps after burn-in of step time / median
};

inline constexpr std::size_t kBenchRepeats = 3;

BenchResult run_bench(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t repeats = kBenchRepeats);

int cmd_run(const CliOptions& opts);
int cmd_starvation(const CliOptions& opts);
int cmd_verify(const CliOptions& opts);
int cmd_bench(const CliOptions& opts);

}  // namespace bkb
