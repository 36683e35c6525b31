#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <random>

#include "bkb/gp_exact.hpp"
#include "bkb/sketch.hpp"

using namespace bkb;

namespace {

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) out(i++, 0) = x;
  return out;
}

Eigen::MatrixXd uniform(std::mt19937_64& gen, int n, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = u(gen);
  return X;
}

}  // namespace

TEST_CASE("single-point embedding") {
  const auto g = KernelSpec::gaussian(3.0);
  const EmbeddingMap emb = build_embedding(g, column({0.2}));
  CHECK(emb.rank == 1);
  CHECK(emb.proj_factor(0, 0) == doctest::Approx(1.0));
  CHECK(embed(emb, scalar(0.2))(0) == doctest::Approx(1.0));
  CHECK(embed(emb, scalar(0.7))(0) == doctest::Approx(eval(g, scalar(0.2), scalar(0.7))));

  const EmbeddingMap lin = build_embedding(KernelSpec::linear(), column({2.0}));
  CHECK(embed(lin, scalar(3.0))(0) == doctest::Approx(6.0 / 2.0));
}

TEST_CASE("duplicate dictionary rows are rank deficient") {
  const EmbeddingMap emb = build_embedding(KernelSpec::gaussian(1.0), column({0.4, 0.4}));
  CHECK(emb.rank == 1);
  const Eigen::VectorXd z = embed(emb, scalar(0.4));
  CHECK(z.squaredNorm() == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_embedding(KernelSpec::gaussian(1.0), Eigen::MatrixXd(0, 1)), std::invalid_argument);
}

TEST_CASE("projection factor whitens the dictionary gram on its range") {
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 6; ++rep) {
    const auto spec = KernelSpec::gaussian(5.0);
    Eigen::MatrixXd S = uniform(gen, 4 + rep, 2);
    if (rep % 2 == 1) S.row(1) = S.row(0);
    const EmbeddingMap emb = build_embedding(spec, S);
    const Eigen::MatrixXd K = gram(spec, S);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    const double cut = 1e-12 * eig.eigenvalues().maxCoeff();
    Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(S.rows(), S.rows());
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
      if (eig.eigenvalues()(i) > cut) {
        proj += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose();
        ++r;
      }
    }
    CHECK(emb.rank == r);
    const Eigen::MatrixXd W = emb.proj_factor * K * emb.proj_factor.transpose();
    CHECK((W - proj).norm() <= 1e-8 * std::max(1.0, proj.norm()));
  }
}

TEST_CASE("embedding inner products are the Nystrom quadratic form") {
  std::mt19937_64 gen(2);
  const auto spec = KernelSpec::matern(2.5, 0.4);
  const Eigen::MatrixXd S = uniform(gen, 6, 2);
  const EmbeddingMap emb = build_embedding(spec, S);
  const Eigen::MatrixXd pinv = gram(spec, S).completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd X = uniform(gen, 20, 2);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = X.row(i).transpose();
    const Eigen::VectorXd ks = gram(spec, S, X.row(i)).col(0);
    const double quad = ks.dot(pinv * ks);
    CHECK(embed(emb, x).squaredNorm() == doctest::Approx(quad).epsilon(1e-7));
    CHECK(embed(emb, x).squaredNorm() <= eval(spec, x, x) + 1e-8);
  }
  for (int i = 0; i < 6; ++i) {
    const Eigen::VectorXd s = S.row(i).transpose();
    CHECK(embed(emb, s).squaredNorm() == doctest::Approx(eval(spec, s, s)).epsilon(1e-8));
  }
}

TEST_CASE("rebuild aggregates pull counters") {
  const auto g = KernelSpec::gaussian(1.0);
  const EmbeddingMap emb = build_embedding(g, column({0.0}));
  const PulledArm once{scalar(0.0), 1.0, 0.5};
  SketchState st = rebuild_sketch(emb, std::span<const PulledArm>(&once, 1), 1.0);
  const Eigen::MatrixXd V = st.v_chol * st.v_chol.transpose();
  CHECK(V(0, 0) == doctest::Approx(2.0));
  const PulledArm thrice{scalar(0.0), 3.0, 0.0};
  st = rebuild_sketch(emb, std::span<const PulledArm>(&thrice, 1), 1.0);
  CHECK(st.zz(0, 0) == doctest::Approx(3.0));
  CHECK(approx_mean(st, scalar(0.0)) == 0.0);
  CHECK_THROWS_AS(rebuild_sketch(emb, std::span<const PulledArm>(), 1.0), std::invalid_argument);
}

TEST_CASE("rebuild matches naive per-pull accumulation") {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> n01;
  const auto spec = KernelSpec::gaussian(8.0);
  const Eigen::MatrixXd arms = uniform(gen, 5, 1);
  const EmbeddingMap emb = build_embedding(spec, arms.topRows(3));
  const int pulls[] = {0, 3, 3, 1, 4, 3, 0};
  std::vector<PulledArm> agg(5);
  Eigen::MatrixXd zz = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd zty = Eigen::VectorXd::Zero(3);
  for (int p : pulls) {
    const double y = n01(gen);
    const Eigen::VectorXd z = embed(emb, arms.row(p).transpose());
    zz += z * z.transpose();
    zty += y * z;
    agg[static_cast<std::size_t>(p)].x = arms.row(p).transpose();
    agg[static_cast<std::size_t>(p)].count += 1.0;
    agg[static_cast<std::size_t>(p)].reward_sum += y;
  }
  std::vector<PulledArm> seen;
  for (const auto& a : agg)
    if (a.count > 0) seen.push_back(a);
  const SketchState st = rebuild_sketch(emb, seen, 0.1);
  CHECK((st.zz - zz).norm() <= 1e-12 * zz.norm());
  CHECK((st.zty - zty).norm() <= 1e-12 * std::max(1.0, zty.norm()));
  Eigen::MatrixXd V = zz;
  V.diagonal().array() += 0.1;
  CHECK((st.v_chol * st.v_chol.transpose() - V).norm() <= 1e-10 * V.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(st.zz, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("one pull, one point closed forms") {
  const auto g = KernelSpec::gaussian(1.0);
  const EmbeddingMap emb = build_embedding(g, column({0.0}));
  const PulledArm p{scalar(0.0), 1.0, 2.0};
  const SketchState st = rebuild_sketch(emb, std::span<const PulledArm>(&p, 1), 1.0);
  CHECK(approx_mean(st, scalar(0.0)) == doctest::Approx(2.0 / (1.0 + 1.0)));
  CHECK(approx_variance(st, scalar(0.0)) == doctest::Approx(0.5));
  CHECK(approx_ucb(st, scalar(0.0), 0.0) == approx_mean(st, scalar(0.0)));
  double prev = -INFINITY;
  for (double b : {0.0, 0.5, 1.0, 4.0}) {
    const double u = approx_ucb(st, scalar(0.3), b);
    CHECK(u >= prev);
    prev = u;
  }
}

TEST_CASE("full dictionary recovers the exact posterior") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> pick(0, 9);
  const KernelSpec specs[] = {KernelSpec::gaussian(20.0), KernelSpec::matern(1.5, 0.2), KernelSpec::linear()};
  for (const auto& spec : specs) {
    const int d = spec.family == KernelFamily::Linear ? 12 : 1;
    const Eigen::MatrixXd arms = uniform(gen, 10, d);
    const double lambda = 0.01;
    ExactPosterior exact(spec, lambda);
    std::vector<PulledArm> agg(10);
    std::vector<int> distinct;
    for (int s = 0; s < 25; ++s) {
      const int a = pick(gen);
      const double y = n01(gen);
      exact.update(arms.row(a).transpose(), y);
      auto& pa = agg[static_cast<std::size_t>(a)];
      if (pa.count == 0) distinct.push_back(a);
      pa.x = arms.row(a).transpose();
      pa.count += 1.0;
      pa.reward_sum += y;
    }
    std::vector<PulledArm> seen;
    for (const auto& pa : agg)
      if (pa.count > 0) seen.push_back(pa);
    const EmbeddingMap emb = build_embedding(spec, arms(distinct, Eigen::all));
    const SketchState st = rebuild_sketch(emb, seen, lambda);
    const double beta = exact.exact_beta(1.0, 0.1, 0.1);
    for (int a = 0; a < 10; ++a) {
      const Eigen::VectorXd x = arms.row(a).transpose();
      const double scale = eval(spec, x, x) / lambda;
      CHECK(approx_mean(st, x) == doctest::Approx(exact.posterior_mean(x)).epsilon(1e-8).scale(1.0));
      CHECK(approx_variance(st, x) == doctest::Approx(exact.posterior_variance(x)).epsilon(1e-8).scale(scale * 1e-3));
      CHECK(approx_ucb(st, x, beta) == doctest::Approx(exact.ucb_score(x, beta)).epsilon(1e-7).scale(1.0));
    }
    CHECK(st.logdet_ratio() == doctest::Approx(exact.logdet_ratio()).epsilon(1e-8));
  }
}

TEST_CASE("DTC keeps the prior far from the dictionary while SoR starves") {
  const auto g = KernelSpec::gaussian(100.0);
  const double lambda = 0.01;
  const EmbeddingMap emb = build_embedding(g, column({0.0, 0.05, 0.1}));
  std::vector<PulledArm> pulls{{scalar(0.0), 2.0, 0.4}, {scalar(0.05), 1.0, 0.1}, {scalar(0.1), 3.0, -0.2}};
  const SketchState st = rebuild_sketch(emb, pulls, lambda);
  for (double x : {0.8, 0.9, 1.0}) {
    CHECK(sor_variance(st, scalar(x)) <= 1e-6);
    CHECK(approx_variance(st, scalar(x)) >= 0.99 / lambda);
  }
  std::mt19937_64 gen(12);
  const Eigen::MatrixXd X = uniform(gen, 50, 1);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = X.row(i).transpose();
    CHECK(approx_variance(st, x) <= 1.0 / lambda);
    CHECK(approx_variance(st, x) >= sor_variance(st, x) - 1e-9);
  }
}

TEST_CASE("batch prediction agrees with pointwise evaluation") {
  std::mt19937_64 gen(14);
  const auto spec = KernelSpec::gaussian(30.0);
  const Eigen::MatrixXd arms = uniform(gen, 30, 1);
  const EmbeddingMap emb = build_embedding(spec, arms.topRows(6));
  std::vector<PulledArm> pulls;
  for (int i = 0; i < 8; ++i) pulls.push_back({arms.row(i).transpose(), 1.0 + i % 3, 0.1 * i});
  const SketchState st = rebuild_sketch(emb, pulls, 0.05);
  const Eigen::MatrixXd Z = embed_cross(emb, gram(spec, arms, arms.topRows(6)));
  const Prediction p = predict(st, Z, diagonal(spec, arms));
  const Prediction s = predict(st, Z, diagonal(spec, arms), true);
  for (int i = 0; i < 30; ++i) {
    const Eigen::VectorXd x = arms.row(i).transpose();
    CHECK(p.mean(i) == doctest::Approx(approx_mean(st, x)).epsilon(1e-12).scale(1.0));
    CHECK(p.variance(i) == doctest::Approx(approx_variance(st, x)).epsilon(1e-10).scale(1.0));
    CHECK(s.variance(i) == doctest::Approx(sor_variance(st, x)).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS_AS(predict(st, Z.leftCols(2), diagonal(spec, arms)), std::invalid_argument);
}
