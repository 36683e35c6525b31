#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <numeric>
#include <random>

#include "bkb/gp_exact.hpp"
#include "bkb/metrics.hpp"

using namespace bkb;

namespace {

Eigen::MatrixXd random_psd(std::mt19937_64& gen, int n, int rank) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd B(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) B(i, j) = g(gen);
  return B * B.transpose();
}

Dictionary full_dictionary(std::size_t t) {
  Dictionary d;
  d.indices.resize(t);
  std::iota(d.indices.begin(), d.indices.end(), 0);
  d.probs.assign(t, 1.0);
  return d;
}

Environment gp_env(std::size_t A, double gamma, std::uint64_t seed) {
  const ArmSet arms = grid_arms(A, 0.0, 1.0);
  CounterRng rng = CounterRng::stream(seed, Stream::Function);
  Eigen::VectorXd f = sample_gp_function(KernelSpec::gaussian(gamma), arms, 1e-10, rng);
  return Environment(arms, std::move(f), 0.1);
}

}  // namespace

TEST_CASE("effective dimension closed forms") {
  CHECK(effective_dimension(Eigen::MatrixXd::Identity(6, 6), 1.0) == doctest::Approx(3.0));
  CHECK(effective_dimension(Eigen::MatrixXd::Ones(4, 4), 1.0) == doctest::Approx(4.0 / 5.0));
  CHECK_THROWS_AS(effective_dimension(Eigen::MatrixXd::Ones(2, 3), 1.0), std::invalid_argument);
}

TEST_CASE("effective dimension matches the trace form") {
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd K = random_psd(gen, 12, 1 + rep);
    const double lambda = 0.1 * (rep + 1);
    const Eigen::MatrixXd reg = K + lambda * Eigen::MatrixXd::Identity(12, 12);
    const double trace = (K * reg.colPivHouseholderQr().inverse()).trace();
    CHECK(effective_dimension(K, lambda) == doctest::Approx(trace).epsilon(1e-10));
  }
}

TEST_CASE("effective dimension grows as rows are appended") {
  CounterRng rng(5);
  const ArmSet arms = uniform_arms(40, 2, 0.0, 1.0, rng);
  const Eigen::MatrixXd K = gram(KernelSpec::gaussian(20.0), arms.matrix());
  double prev = 0.0;
  for (Eigen::Index t = 1; t <= 40; ++t) {
    const double d = effective_dimension(K.topLeftCorner(t, t), 0.05);
    CHECK(d >= prev - 1e-12);
    prev = d;
  }
}

TEST_CASE("chain closed forms") {
  const double v = 0.5;
  const ChainReport one = logdet_deff_chain(Eigen::MatrixXd::Ones(1, 1), 1.0, std::span<const double>(&v, 1));
  CHECK(one.deff == doctest::Approx(0.5));
  CHECK(one.sum_var == doctest::Approx(0.5));
  CHECK(one.logdet == doctest::Approx(std::log(2.0)));
  CHECK(one.upper == doctest::Approx(0.5 * (1.0 + std::log(2.0))));
  CHECK(one.holds());

  const std::vector<double> halves(5, 0.5);
  const ChainReport ortho = logdet_deff_chain(Eigen::MatrixXd::Identity(5, 5), 1.0, halves);
  CHECK(ortho.deff == doctest::Approx(2.5));
  CHECK(ortho.sum_var == doctest::Approx(2.5));
  CHECK(ortho.logdet == doctest::Approx(5.0 * std::log(2.0)));
  CHECK(ortho.holds());
  CHECK(ortho.min_slack() >= -1e-12);
  CHECK_THROWS_AS(logdet_deff_chain(Eigen::MatrixXd::Identity(3, 3), 1.0, halves), std::invalid_argument);
}

TEST_CASE("chain holds along exact runs") {
  const auto g = KernelSpec::gaussian(50.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Environment env = gp_env(30, 50.0, seed);
    BkbParams p;
    p.sampling.horizon = 40;
    p.lambda = 0.05;
    p.xi = 0.2;
    const Trace tr = run_gpucb(env, g, p, 40, seed);
    const Eigen::MatrixXd K = gram(g, env.arms().matrix());
    std::vector<double> post;
    for (const auto& r : tr.steps) post.push_back(r.post_variance);
    for (std::size_t t : {10u, 25u, 40u}) {
      const std::vector<std::size_t> prefix(tr.history.begin(), tr.history.begin() + static_cast<long>(t));
      const ChainReport c = logdet_deff_chain(K(prefix, prefix), p.lambda, std::span<const double>(post.data(), t));
      CHECK(c.holds());
      CHECK(c.min_slack() >= -1e-10);
    }
    const MonotonicityReport m = check_monotonicity(tr, 1.0, p.lambda);
    CHECK(m.steps == 40);
    CHECK(m.violations == 0);
  }
}

TEST_CASE("monotonicity flags a broken trace") {
  Trace tr;
  TraceStep ok;
  ok.selected_variance = 10.0;
  ok.post_variance = 5.0;
  TraceStep up = ok;
  up.post_variance = 11.0;
  TraceStep collapse = ok;
  collapse.post_variance = 1e-6;
  tr.steps = {ok, up, collapse};
  const MonotonicityReport m = check_monotonicity(tr, 1.0, 0.1);
  CHECK(m.steps == 3);
  CHECK(m.violations == 2);
  CHECK(m.worst_excess == doctest::Approx(1.0));
}

TEST_CASE("linear sandwich with a full dictionary is exact") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(30, 5);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 5; ++j) X(i, j) = g(gen);
  const SandwichReport r = linear_oracle_sandwich(KernelSpec::linear(), X, full_dictionary(30), 0.1, 0.5);
  CHECK(r.min_ratio == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.max_ratio == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.within);
  CHECK(r.accuracy_norm <= 1e-10);
  CHECK(r.eps_accurate);

  Eigen::MatrixXd same(4, 3);
  for (int i = 0; i < 4; ++i) same.row(i) << 1.0, -2.0, 0.5;
  Dictionary one;
  one.indices = {2};
  one.probs.assign(4, 1.0);
  const SandwichReport s = linear_oracle_sandwich(KernelSpec::linear(), same, one, 0.3, 0.5);
  CHECK(s.min_ratio == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.max_ratio == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("linear sandwich detects a dictionary missing a direction") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(10, 2);
  for (int i = 0; i < 5; ++i) X(i, 0) = 1.0;
  for (int i = 5; i < 10; ++i) X(i, 1) = 1.0;
  Dictionary d;
  d.indices = {0};
  d.probs.assign(10, 1.0);
  const SandwichReport r = linear_oracle_sandwich(KernelSpec::linear(), X, d, 0.01, 0.5);
  CHECK(r.min_ratio == doctest::Approx(0.01 / 5.01).epsilon(1e-8));
  CHECK_FALSE(r.within);
  CHECK_FALSE(r.eps_accurate);
  CHECK_THROWS_AS(linear_oracle_sandwich(KernelSpec::gaussian(1.0), X, d, 0.01, 0.5), std::invalid_argument);
}

TEST_CASE("cumulative regret") {
  Eigen::VectorXd f(3);
  f << 0.0, 1.0, 0.4;
  const Environment env(grid_arms(3, 0.0, 1.0), f, 0.0);
  auto make = [](std::vector<std::size_t> h) {
    Trace tr;
    tr.history = std::move(h);
    tr.steps.resize(tr.history.size());
    return tr;
  };
  const Trace best = make({1, 1, 1});
  for (double r : cumulative_regret(best, env)) CHECK(r == 0.0);
  Trace broken = make({0, 1});
  broken.steps.pop_back();
  CHECK_THROWS_AS(cumulative_regret(broken, env), std::invalid_argument);
  const Trace one = make({1, 1, 2, 1, 1});
  const auto r = cumulative_regret(one, env);
  CHECK(r[1] == 0.0);
  for (std::size_t t = 2; t < 5; ++t) CHECK(r[t] == doctest::Approx(0.6));

  std::mt19937_64 gen(3);
  std::uniform_int_distribution<std::size_t> pick(0, 2);
  Trace rnd;
  for (int i = 0; i < 40; ++i) rnd.history.push_back(pick(gen));
  rnd.steps.resize(40);
  const auto c = cumulative_regret(rnd, env);
  for (std::size_t t = 0; t < 40; ++t) {
    double naive = 0.0;
    for (std::size_t s = 0; s <= t; ++s) naive += f(1) - f(static_cast<Eigen::Index>(rnd.history[s]));
    CHECK(c[t] == doctest::Approx(naive).epsilon(1e-12));
  }
}

TEST_CASE("accuracy run with a full dictionary has unit ratios") {
  const Environment env = gp_env(15, 50.0, 1);
  BkbParams p;
  p.sampling.horizon = 25;
  p.sampling.qbar = std::numeric_limits<double>::infinity();
  p.lambda = 0.01;
  p.xi = 0.1;
  const AccuracyReport rep = verify_accuracy_run(env, KernelSpec::gaussian(50.0), p, 25, 1);
  CHECK(rep.min_ratio.size() == 24);
  CHECK(rep.m.size() == 25);
  CHECK_FALSE(rep.accuracy_failed());
  for (std::size_t i = 0; i < rep.min_ratio.size(); ++i) {
    CHECK(rep.min_ratio[i] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.max_ratio[i] == doctest::Approx(1.0).epsilon(1e-6));
  }
  const Eigen::MatrixXd K = gram(KernelSpec::gaussian(50.0), env.arms().matrix());
  CHECK(rep.deff.back() > 0.0);
  CHECK(rep.logdet.back() >= rep.deff.back());
}

TEST_CASE("fit helpers") {
  std::vector<double> x, y;
  for (int i = 1; i <= 20; ++i) {
    x.push_back(i);
    y.push_back(3.0 * std::pow(i, 1.7));
  }
  CHECK(fit_loglog_slope(x, y) == doctest::Approx(1.7).epsilon(1e-12));
  CHECK_THROWS_AS(fit_loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), std::invalid_argument);
}
