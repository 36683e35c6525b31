#include "bkb/harness.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "bkb/gp_exact.hpp"
#include "bkb/sketch.hpp"

namespace bkb {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Every index runs; the
/// error for the lowest failing index is returned.
template <class Fn>
std::optional<std::pair<std::size_t, std::string>> parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::optional<std::pair<std::size_t, std::string>> failure;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure || i < failure->first) failure = std::make_pair(i, std::string(ex.what()));
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return failure;
}

std::vector<Environment> build_environments(const ExperimentConfig& cfg, std::span<const std::uint64_t> seeds) {
  std::vector<Environment> envs;
  envs.reserve(seeds.size());
  for (std::uint64_t s : seeds) envs.push_back(cfg.make_environment(s));
  return envs;
}

std::vector<std::uint64_t> shifted_seeds(const ExperimentConfig& cfg, std::uint64_t offset) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s : cfg.seeds) out.push_back(s + offset);
  return out;
}

ExperimentConfig load_or_default(const CliOptions& opts, bool required) {
  if (opts.config) return load_config(*opts.config);
  if (required) throw ConfigError("--config", "a config file is required");
  return ExperimentConfig{};
}

std::filesystem::path output_dir(const ExperimentConfig& cfg, const CliOptions& opts) {
  std::filesystem::path dir = opts.output ? *opts.output : cfg.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

template <class Body>
int guarded(const char* name, Body&& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& ex) {
    spdlog::error("{}: invalid config: {}", name, ex.what());
    std::cerr << "invalid config: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    spdlog::error("{}: {}", name, ex.what());
    std::cerr << "error: " << ex.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

void configure_logging() {
  auto logger = spdlog::get("bkb_kit");
  if (!logger) logger = spdlog::stderr_color_mt("bkb_kit");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("BKB_KIT_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (level != "info") spdlog::warn("BKB_KIT_LOG='{}' not recognised, using info", level);
  }
}

std::string trace_csv(const Trace& trace, bool with_timing) {
  std::string out = std::string(kTraceSchema) + "\n";
  out += "t,arm_index,reward,inst_regret,cum_regret,m_t,beta,sum_var,step_ms,clamp_events,fallback_events\n";
  std::size_t fallbacks = 0;
  for (const TraceStep& r : trace.steps) {
    fallbacks += r.fallback ? 1 : 0;
    out += fmt::format("{},{},{},{},{},{},{},{},{:.6f},{},{}\n", r.t, r.arm, num(r.reward), num(r.inst_regret),
                       num(r.cum_regret), r.m, num(r.beta), num(r.sum_var), with_timing ? r.step_ms : 0.0,
                       r.clamp_events, fallbacks);
  }
  return out;
}

std::string summary_csv(std::span<const CellResult> cells) {
  std::string out = std::string(kSummarySchema) + "\n";
  out += "algorithm,seed,T,A,cum_regret,regret_per_step,final_m,max_m,final_beta,total_ms,clamp_events,fallback_events\n";
  for (const CellResult& c : cells) {
    const auto& steps = c.trace.steps;
    const TraceStep& last = steps.back();
    std::size_t max_m = 0;
    for (const auto& r : steps) max_m = std::max(max_m, r.m);
    out += fmt::format("{},{},{},{},{},{},{},{},{},{:.3f},{},{}\n", c.algorithm.name(), c.seed, steps.size(), c.arms,
                       num(last.cum_regret), num(last.cum_regret / static_cast<double>(steps.size())), last.m, max_m,
                       num(last.beta), c.total_ms, c.trace.clamp_events, c.trace.fallback_events);
  }
  return out;
}

std::string trace_file_name(const CellResult& cell) {
  return fmt::format("trace_{}_seed{}.csv", cell.algorithm.name(), cell.seed);
}

Trace run_cell(const ExperimentConfig& cfg, const AlgorithmSpec& alg, std::uint64_t seed, const Environment& env) {
  const BkbParams params = cfg.params_for(alg, seed);
  if (alg.kind == AlgorithmSpec::Kind::Gpucb) return run_gpucb(env, cfg.kernel, params, cfg.horizon, seed);
  return run_bkb(env, cfg.kernel, params, cfg.horizon, seed);
}

std::vector<CellResult> run_grid(const ExperimentConfig& cfg, std::size_t workers, std::uint64_t seed_offset) {
  const std::vector<std::uint64_t> seeds = shifted_seeds(cfg, seed_offset);
  const std::vector<Environment> envs = build_environments(cfg, seeds);
  const std::size_t n_alg = cfg.algorithms.size();
  std::vector<CellResult> cells(seeds.size() * n_alg);
  const auto failure = parallel_for(cells.size(), workers, [&](std::size_t i) {
    const std::size_t si = i / n_alg;
    CellResult& c = cells[i];
    c.algorithm = cfg.algorithms[i % n_alg];
    c.seed = seeds[si];
    c.arms = static_cast<std::size_t>(envs[si].arms().size());
    spdlog::debug("cell {} seed {} started", c.algorithm.name(), c.seed);
    const auto t0 = std::chrono::steady_clock::now();
    c.trace = run_cell(cfg, c.algorithm, c.seed, envs[si]);
    c.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    spdlog::debug("cell {} seed {} done in {:.1f} ms", c.algorithm.name(), c.seed, c.total_ms);
  });
  if (failure) {
    const std::size_t i = failure->first;
    throw std::runtime_error(fmt::format("cell algorithm={} seed={} failed: {}", cfg.algorithms[i % n_alg].name(),
                                         seeds[i / n_alg], failure->second));
  }
  return cells;
}

double StarvationCheckpoint::coverage() const {
  const double scale = 3.0 * std::sqrt(lambda);
  std::size_t inside = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (std::abs(f(i) - mu_tilde(i)) <= scale * sigma_tilde(i)) ++inside;
  return static_cast<double>(inside) / static_cast<double>(f.size());
}

std::vector<StarvationCheckpoint> run_starvation(std::uint64_t seed, const StarvationOptions& opts) {
  CounterRng frng = CounterRng::stream(seed, Stream::Function);
  const StarvationSetup setup = fig1_environment(frng, opts.grid, opts.noise);
  const Environment& env = setup.env;
  const ArmSet& arms = env.arms();
  const double lambda = opts.noise * opts.noise;
  const Eigen::MatrixXd K = gram(setup.kernel, arms.matrix());
  const Eigen::VectorXd prior = K.diagonal();
  const std::size_t T = setup.checkpoints.back();

  SamplingParams sp;
  sp.eps = opts.eps;
  sp.horizon = T;
  sp.qbar = opts.qbar;
  sp.rng_seed = seed;
  sp.validate();

  CounterRng pick = CounterRng::stream(seed, Stream::Passive);
  CounterRng noise = CounterRng::stream(seed, Stream::Noise);
  std::vector<std::size_t> history;
  std::vector<double> rewards;
  std::vector<double> counts(static_cast<std::size_t>(arms.size()), 0.0);
  std::vector<double> sums(counts.size(), 0.0);
  Dictionary dict;

  auto fit = [&](const Dictionary& d) {
    std::vector<Eigen::Index> dict_arms;
    for (std::size_t i : d.indices) dict_arms.push_back(static_cast<Eigen::Index>(history[i]));
    EmbeddingMap emb = build_embedding_from_gram(setup.kernel, arms.rows(dict_arms), K(dict_arms, dict_arms));
    Eigen::MatrixXd Z = embed_cross(emb, K(Eigen::all, dict_arms));
    std::vector<Eigen::Index> pulled;
    std::vector<double> pc, ps;
    for (std::size_t a = 0; a < counts.size(); ++a) {
      if (counts[a] > 0.0) {
        pulled.push_back(static_cast<Eigen::Index>(a));
        pc.push_back(counts[a]);
        ps.push_back(sums[a]);
      }
    }
    SketchState st = rebuild_sketch_embedded(std::move(emb), Z(pulled, Eigen::all), pc, ps, lambda);
    return std::make_pair(std::move(st), std::move(Z));
  };

  std::vector<StarvationCheckpoint> out;
  std::vector<double> hist_var;
  for (std::size_t t = 1; t <= T; ++t) {
    Eigen::VectorXd var_before;
    if (t > 1) {
      const auto [st, Z] = fit(dict);
      var_before = predict(st, Z, prior).variance;
    } else {
      var_before = prior / lambda;
    }
    const std::size_t arm = setup.pool[pick.uniform_index(setup.pool.size())];
    const double y = env.observe(arm, noise);
    history.push_back(arm);
    rewards.push_back(y);
    counts[arm] += 1.0;
    sums[arm] += y;

    hist_var.resize(t);
    for (std::size_t i = 0; i < t; ++i) hist_var[i] = var_before(static_cast<Eigen::Index>(history[i]));
    CounterRng draw = CounterRng::stream(seed, Stream::Dictionary, t);
    dict = resample(history, hist_var, sp, draw);

    if (std::find(setup.checkpoints.begin(), setup.checkpoints.end(), t) == setup.checkpoints.end()) continue;

    const auto [st, Z] = fit(dict);
    const Prediction dtc = predict(st, Z, prior);
    const Prediction sor = predict(st, Z, prior, true);
    ExactPosterior exact(setup.kernel, lambda);
    for (std::size_t i = 0; i < t; ++i) exact.update(arms.arm(static_cast<Eigen::Index>(history[i])), rewards[i]);
    const Prediction ex = exact.predict(K(history, Eigen::all), prior);

    StarvationCheckpoint cp;
    cp.seed = seed;
    cp.t = t;
    cp.m = dict.size();
    cp.lambda = lambda;
    cp.alpha = sp.alpha();
    cp.x = arms.matrix().col(0);
    cp.f = env.f_values();
    cp.mu_tilde = dtc.mean;
    cp.sigma_tilde = dtc.variance.array().sqrt();
    cp.sigma_exact = ex.variance.array().sqrt();
    cp.sigma_sor = sor.variance.array().sqrt();
    for (std::size_t i : dict.indices)
      if (arms.matrix()(static_cast<Eigen::Index>(history[i]), 0) > StarvationSetup::kPoolHigh) ++cp.dict_outside_pool;
    out.push_back(std::move(cp));
  }
  return out;
}

std::string starvation_csv(const StarvationCheckpoint& cp) {
  std::string out = "# bkb_kit starvation v1\n";
  out += "x,f,mu_tilde,sigma_tilde,sigma_exact,sigma_sor\n";
  for (Eigen::Index i = 0; i < cp.x.size(); ++i)
    out += fmt::format("{},{},{},{},{},{}\n", num(cp.x(i)), num(cp.f(i)), num(cp.mu_tilde(i)), num(cp.sigma_tilde(i)),
                       num(cp.sigma_exact(i)), num(cp.sigma_sor(i)));
  return out;
}

VerifyResult run_verify(const ExperimentConfig& cfg, std::size_t workers, std::uint64_t seed_offset) {
  if (cfg.qbar_mode != QbarMode::Theorem)
    throw ConfigError("sampling.qbar_mode", "verify needs theorem mode");
  const std::vector<std::uint64_t> seeds = shifted_seeds(cfg, seed_offset);
  const std::vector<Environment> envs = build_environments(cfg, seeds);
  const bool linear = cfg.kernel.family == KernelFamily::Linear;
  VerifyResult res;
  res.seeds.resize(seeds.size());
  const auto failure = parallel_for(seeds.size(), workers, [&](std::size_t i) {
    VerifySeed& v = res.seeds[i];
    v.seed = seeds[i];
    const Environment& env = envs[i];
    const BkbParams bkb = cfg.params_for(AlgorithmSpec{}, v.seed);
    v.accuracy = verify_accuracy_run(env, cfg.kernel, bkb, cfg.horizon, v.seed);

    AlgorithmSpec gp;
    gp.kind = AlgorithmSpec::Kind::Gpucb;
    const Trace exact = run_gpucb(env, cfg.kernel, cfg.params_for(gp, v.seed), cfg.horizon, v.seed);
    const Eigen::MatrixXd K = gram(cfg.kernel, env.arms().matrix());
    v.monotonicity = check_monotonicity(exact, K.diagonal().maxCoeff(), cfg.lambda);
    std::vector<double> post;
    for (const auto& r : exact.steps) post.push_back(r.post_variance);
    for (std::size_t t : kChainCheckpoints) {
      if (t > cfg.horizon) continue;
      const std::vector<std::size_t> prefix(exact.history.begin(), exact.history.begin() + static_cast<long>(t));
      v.chain_t.push_back(t);
      v.chain.push_back(logdet_deff_chain(K(prefix, prefix), cfg.lambda, std::span<const double>(post.data(), t)));
    }

    if (linear) {
      const Trace tr = run_bkb(env, cfg.kernel, bkb, cfg.horizon, v.seed);
      const Eigen::MatrixXd hist = env.arms().matrix()(tr.history, Eigen::all);
      v.sandwich = linear_oracle_sandwich(cfg.kernel, hist, tr.final_dictionary, cfg.lambda, cfg.eps);
    }
  });
  if (failure)
    throw std::runtime_error(fmt::format("verify seed={} failed: {}", seeds[failure->first], failure->second));

  for (const VerifySeed& v : res.seeds) {
    if (v.accuracy.accuracy_failed()) ++res.failed_runs;
    else res.size_violations += v.accuracy.size_violations;
    res.monotonicity_violations += v.monotonicity.violations;
    for (const auto& c : v.chain) res.chain_failures += c.holds() ? 0 : 1;
    if (v.sandwich) {
      ++res.sandwich_runs;
      res.sandwich_within += v.sandwich->within ? 1 : 0;
    }
  }
  return res;
}

BenchResult run_bench(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t repeats) {
  if (cfg.qbar_mode != QbarMode::Override)
    throw ConfigError("sampling.qbar_mode", "bench needs a practical qbar (override mode)");
  if (repeats < 1) repeats = 1;
  const Environment env = cfg.make_environment(seed);
  const AlgorithmSpec bkb_alg;
  AlgorithmSpec gp_alg;
  gp_alg.kind = AlgorithmSpec::Kind::Gpucb;

  BenchResult res;
  res.arms = static_cast<std::size_t>(env.arms().size());
  res.horizon = cfg.horizon;
  res.repeats = repeats;
  auto fold = [](std::vector<double>& acc, const Trace& tr) {
    if (acc.empty()) acc.assign(tr.steps.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < tr.steps.size(); ++i) acc[i] = std::min(acc[i], tr.steps[i].step_ms);
  };
  for (std::size_t r = 0; r < repeats; ++r) {
    const Trace b = run_cell(cfg, bkb_alg, seed, env);
    fold(res.bkb_ms, b);
    if (res.bkb_m.empty())
      for (const auto& s : b.steps) res.bkb_m.push_back(s.m);
    fold(res.gpucb_ms, run_cell(cfg, gp_alg, seed, env));
  }

  const std::size_t T = cfg.horizon;
  res.fit_lo = std::min<std::size_t>(100, T);
  res.fit_hi = std::min<std::size_t>(1000, T);
  std::vector<double> ts, gy, by;
  for (std::size_t t = res.fit_lo; t <= res.fit_hi; ++t) {
    ts.push_back(static_cast<double>(t));
    gy.push_back(res.gpucb_ms[t - 1]);
    by.push_back(res.bkb_ms[t - 1]);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  res.gpucb_exponent = ts.size() >= 2 ? fit_loglog_slope(ts, gy) : nan;
  res.bkb_exponent = ts.size() >= 2 ? fit_loglog_slope(ts, by) : nan;

  res.burn_in = 4 * res.bkb_m.back();
  std::vector<double> after;
  for (std::size_t t = res.burn_in + 1; t <= T; ++t) after.push_back(res.bkb_ms[t - 1]);
  if (after.empty()) {
    res.bkb_median_ms = nan;
    res.bkb_max_ratio = nan;
  } else {
    res.bkb_median_ms = median(after);
    res.bkb_max_ratio = *std::max_element(after.begin(), after.end()) / res.bkb_median_ms;
  }
  return res;
}

int cmd_run(const CliOptions& opts) {
  return guarded("run", [&] {
    const ExperimentConfig cfg = load_or_default(opts, true);
    const auto dir = output_dir(cfg, opts);
    spdlog::info("run: {} algorithm(s) x {} seed(s), T={}", cfg.algorithms.size(), cfg.seeds.size(), cfg.horizon);
    const std::vector<CellResult> cells = run_grid(cfg, opts.workers, opts.seed_offset);
    for (const CellResult& c : cells) write_text(dir / trace_file_name(c), trace_csv(c.trace));
    write_text(dir / "summary.csv", summary_csv(cells));
    spdlog::info("run: wrote {} trace file(s) to {}", cells.size(), dir.string());
  });
}

int cmd_starvation(const CliOptions& opts) {
  return guarded("starvation", [&] {
    const ExperimentConfig cfg = load_or_default(opts, false);
    const auto dir = output_dir(cfg, opts);
    StarvationOptions so;
    so.grid = cfg.starvation_grid;
    so.noise = cfg.starvation_noise;
    so.qbar = cfg.starvation_qbar;
    so.eps = cfg.eps;
    const std::vector<std::uint64_t> seeds = shifted_seeds(cfg, opts.seed_offset);
    std::vector<std::vector<StarvationCheckpoint>> results(seeds.size());
    const auto failure =
        parallel_for(seeds.size(), opts.workers, [&](std::size_t i) { results[i] = run_starvation(seeds[i], so); });
    if (failure)
      throw std::runtime_error(fmt::format("starvation seed={} failed: {}", seeds[failure->first], failure->second));
    std::string summary = "# bkb_kit starvation summary v1\nseed,t,m_t,coverage,dict_outside_pool\n";
    for (const auto& per_seed : results) {
      for (const auto& cp : per_seed) {
        write_text(dir / fmt::format("starvation_seed{}_t{:03}.csv", cp.seed, cp.t), starvation_csv(cp));
        summary += fmt::format("{},{},{},{},{}\n", cp.seed, cp.t, cp.m, num(cp.coverage()), cp.dict_outside_pool);
      }
    }
    write_text(dir / "starvation_summary.csv", summary);
    spdlog::info("starvation: {} seed(s) written to {}", seeds.size(), dir.string());
  });
}

int cmd_verify(const CliOptions& opts) {
  return guarded("verify", [&] {
    const ExperimentConfig cfg = load_or_default(opts, true);
    const auto dir = output_dir(cfg, opts);
    const VerifyResult res = run_verify(cfg, opts.workers, opts.seed_offset);

    std::string acc = "# bkb_kit accuracy v1\nseed,steps,min_ratio,max_ratio,violations,failed\n";
    std::string size = "# bkb_kit size v1\nseed,t,m_t,deff,logdet,bound,ok\n";
    std::string mono = "# bkb_kit monotonicity v1\nseed,steps,violations,worst_excess\n";
    std::string chain =
        "# bkb_kit chain v1\nseed,t,deff,sum_var,logdet,upper,slack_deff_sumvar,slack_sumvar_logdet,"
        "slack_logdet_upper,holds\n";
    std::string sand = "# bkb_kit sandwich v1\nseed,min_ratio,max_ratio,within,accuracy_norm,eps_accurate\n";
    for (const VerifySeed& v : res.seeds) {
      const auto& a = v.accuracy;
      const double mn = a.min_ratio.empty() ? 1.0 : *std::min_element(a.min_ratio.begin(), a.min_ratio.end());
      const double mx = a.max_ratio.empty() ? 1.0 : *std::max_element(a.max_ratio.begin(), a.max_ratio.end());
      acc += fmt::format("{},{},{},{},{},{}\n", v.seed, a.min_ratio.size(), num(mn), num(mx), a.total_violations,
                         a.accuracy_failed() ? 1 : 0);
      for (std::size_t t = 0; t < a.m.size(); ++t)
        size += fmt::format("{},{},{},{},{},{},{}\n", v.seed, t + 1, a.m[t], num(a.deff[t]), num(a.logdet[t]),
                            num(a.size_bound[t]), static_cast<double>(a.m[t]) <= a.size_bound[t] ? 1 : 0);
      mono += fmt::format("{},{},{},{}\n", v.seed, v.monotonicity.steps, v.monotonicity.violations,
                          num(v.monotonicity.worst_excess));
      for (std::size_t k = 0; k < v.chain.size(); ++k) {
        const ChainReport& c = v.chain[k];
        chain += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", v.seed, v.chain_t[k], num(c.deff), num(c.sum_var),
                             num(c.logdet), num(c.upper), num(c.slack_deff_sumvar), num(c.slack_sumvar_logdet),
                             num(c.slack_logdet_upper), c.holds() ? 1 : 0);
      }
      if (v.sandwich)
        sand += fmt::format("{},{},{},{},{},{}\n", v.seed, num(v.sandwich->min_ratio), num(v.sandwich->max_ratio),
                            v.sandwich->within ? 1 : 0, num(v.sandwich->accuracy_norm),
                            v.sandwich->eps_accurate ? 1 : 0);
    }
    write_text(dir / "accuracy_report.csv", acc);
    write_text(dir / "size_report.csv", size);
    write_text(dir / "monotonicity_report.csv", mono);
    write_text(dir / "chain_report.csv", chain);
    if (res.sandwich_runs > 0) write_text(dir / "sandwich_report.csv", sand);
    const double frac = static_cast<double>(res.failed_runs) / static_cast<double>(res.seeds.size());
    write_text(dir / "verify_summary.csv",
               fmt::format("# bkb_kit verify summary v1\nruns,failed_runs,failed_fraction,size_violations,"
                           "monotonicity_violations,chain_failures,sandwich_runs,sandwich_within\n"
                           "{},{},{},{},{},{},{},{}\n",
                           res.seeds.size(), res.failed_runs, num(frac), res.size_violations,
                           res.monotonicity_violations, res.chain_failures, res.sandwich_runs, res.sandwich_within));
    spdlog::info("verify: {}/{} runs violated the accuracy sandwich, {} size violations", res.failed_runs,
                 res.seeds.size(), res.size_violations);
  });
}

int cmd_bench(const CliOptions& opts) {
  return guarded("bench", [&] {
    const ExperimentConfig cfg = load_or_default(opts, true);
    const auto dir = output_dir(cfg, opts);
    const std::uint64_t seed = cfg.seeds.front() + opts.seed_offset;
    const BenchResult res = run_bench(cfg, seed);
    std::string steps = "# bkb_kit bench steps v1\nalgorithm,t,A,m_t,step_ms\n";
    for (std::size_t t = 1; t <= res.horizon; ++t)
      steps += fmt::format("bkb,{},{},{},{:.6f}\n", t, res.arms, res.bkb_m[t - 1], res.bkb_ms[t - 1]);
    for (std::size_t t = 1; t <= res.horizon; ++t)
      steps += fmt::format("gpucb,{},{},{},{:.6f}\n", t, res.arms, t, res.gpucb_ms[t - 1]);
    write_text(dir / "bench_steps.csv", steps);
    write_text(dir / "bench_report.csv",
               fmt::format("# bkb_kit bench report v1\nA,T,repeats,fit_lo,fit_hi,gpucb_exponent,bkb_exponent,m_T,"
                           "burn_in,bkb_median_ms,bkb_max_ratio\n{},{},{},{},{},{},{},{},{},{},{}\n",
                           res.arms, res.horizon, res.repeats, res.fit_lo, res.fit_hi, num(res.gpucb_exponent),
                           num(res.bkb_exponent), res.bkb_m.back(), res.burn_in, num(res.bkb_median_ms),
                           num(res.bkb_max_ratio)));
    spdlog::info("bench: gpucb exponent {:.3f}, bkb max/median after burn-in {:.2f}", res.gpucb_exponent,
                 res.bkb_max_ratio);
  });
}

}  // namespace bkb
