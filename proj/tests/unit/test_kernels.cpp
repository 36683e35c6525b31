#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "bkb/kernels.hpp"

using namespace bkb;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// General Matern through the modified Bessel function, used as an oracle for the closed forms.
double matern_bessel(double nu, double ell, double r) {
  if (r == 0.0) return 1.0;
  const double s = std::sqrt(2.0 * nu) * r / ell;
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(s, nu) * std::cyl_bessel_k(nu, s);
}

Eigen::MatrixXd random_points(std::mt19937_64& gen, int n, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = u(gen);
  return X;
}

}  // namespace

TEST_CASE("gaussian eval closed form") {
  const auto g = KernelSpec::gaussian(100.0);
  CHECK(eval(g, vec({0.1}), vec({0.1})) == 1.0);
  CHECK(eval(g, vec({0.0}), vec({0.1})) == doctest::Approx(0.3678794).epsilon(1e-6));
  CHECK(eval(g, vec({0.0}), vec({0.1})) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("linear eval is the dot product") {
  CHECK(eval(KernelSpec::linear(), vec({1, 2}), vec({3, 4})) == 11.0);
}

TEST_CASE("matern closed forms agree with the Bessel expression") {
  for (double nu : {0.5, 1.5, 2.5}) {
    for (double ell : {0.3, 1.0, 2.5}) {
      const auto m = KernelSpec::matern(nu, ell);
      for (double r : {0.0, 0.01, 0.2, 0.7, 1.9, 4.0}) {
        CAPTURE(nu);
        CAPTURE(r);
        CHECK(eval(m, vec({0.0, 0.0}), vec({r, 0.0})) == doctest::Approx(matern_bessel(nu, ell, r)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("eval rejects bad input") {
  const auto g = KernelSpec::gaussian(1.0);
  CHECK_THROWS_AS(eval(g, vec({1.0}), vec({1.0, 2.0})), std::invalid_argument);
  CHECK_THROWS_AS(eval(g, vec({NAN}), vec({1.0})), std::invalid_argument);
  CHECK_THROWS_AS(eval(g, vec({INFINITY}), vec({1.0})), std::invalid_argument);
}

TEST_CASE("kernel spec validation") {
  CHECK_THROWS_AS(KernelSpec::matern(2.0, 1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::matern(1.5, 0.0).validate(), std::invalid_argument);
  CHECK_NOTHROW(KernelSpec::matern(0.5, 1.0).validate());
  CHECK_NOTHROW(KernelSpec::linear().validate());
  CHECK(parse_kernel_family(to_string(KernelFamily::Matern)) == KernelFamily::Matern);
  CHECK_THROWS_AS(parse_kernel_family("rbf2"), std::invalid_argument);
}

TEST_CASE("arm set") {
  CHECK_THROWS_AS(ArmSet(Eigen::MatrixXd(0, 2)), std::invalid_argument);
  Eigen::MatrixXd bad(1, 1);
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(ArmSet{bad}, std::invalid_argument);
  Eigen::MatrixXd X(3, 2);
  X << 1, 2, 3, 4, 5, 6;
  const ArmSet arms(X);
  const std::vector<int> idx{2, 0, 2};
  const Eigen::MatrixXd R = arms.rows(idx);
  CHECK(R.rows() == 3);
  CHECK(R(0, 0) == 5.0);
  CHECK(R(1, 1) == 2.0);
  CHECK(R(2, 1) == 6.0);
}

TEST_CASE("gram examples") {
  Eigen::MatrixXd X(4, 1);
  X << 0.0, 0.3, 0.31, 0.9;
  const auto G = gram(KernelSpec::gaussian(5.0), X);
  for (int i = 0; i < 4; ++i) CHECK(G(i, i) == 1.0);
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  CHECK(gram(KernelSpec::linear(), I2, I2) == I2);

  Eigen::MatrixXd P(3, 1);
  P << 0.0, 0.05, 0.5;
  const auto g = KernelSpec::gaussian(100.0);
  const auto H = gram(g, P);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(H(i, j) == doctest::Approx(eval(g, P.row(i).transpose(), P.row(j).transpose())));
  CHECK_THROWS_AS(gram(g, P, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("gram is symmetric and PSD for random subsets") {
  std::mt19937_64 gen(7);
  const KernelSpec specs[] = {KernelSpec::gaussian(3.0), KernelSpec::linear(), KernelSpec::matern(0.5, 0.4),
                              KernelSpec::matern(1.5, 0.7), KernelSpec::matern(2.5, 1.2)};
  for (const auto& spec : specs) {
    for (int rep = 0; rep < 10; ++rep) {
      const int n = 2 + rep * 2;
      const Eigen::MatrixXd X = random_points(gen, n, 3);
      const Eigen::MatrixXd G = gram(spec, X);
      CHECK((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
      const double mx = eig.eigenvalues().maxCoeff();
      CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * mx);
      const Eigen::MatrixXd C = gram(spec, X, X);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) CHECK(C(i, j) == eval(spec, X.row(i).transpose(), X.row(j).transpose()));
    }
  }
}

TEST_CASE("eval symmetry is bit exact and gaussian decreases with distance") {
  std::mt19937_64 gen(11);
  const auto g = KernelSpec::gaussian(2.0);
  const auto m = KernelSpec::matern(2.5, 0.5);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::MatrixXd P = random_points(gen, 2, 4);
    const Eigen::VectorXd x = P.row(0), y = P.row(1);
    CHECK(eval(g, x, y) == eval(g, y, x));
    CHECK(eval(m, x, y) == eval(m, y, x));
    CHECK(eval(KernelSpec::linear(), x, y) == eval(KernelSpec::linear(), y, x));
  }
  double prev = 2.0;
  for (double r = 0.0; r < 3.0; r += 0.05) {
    const double k = eval(g, vec({0.0}), vec({r}));
    CHECK(k < prev);
    prev = k;
  }
}

TEST_CASE("kappa squared and diagonal") {
  Eigen::MatrixXd X(2, 2);
  X << 3, 4, 1, 0;
  const ArmSet arms(X);
  CHECK(kappa_sq(KernelSpec::linear(), arms) == 25.0);
  CHECK(kappa_sq(KernelSpec::gaussian(100.0), arms) == 1.0);
  CHECK(kappa_sq(KernelSpec::matern(2.5, 0.3), arms) == 1.0);
  const Eigen::VectorXd d = diagonal(KernelSpec::linear(), X);
  CHECK(d(0) == 25.0);
  CHECK(d(1) == 1.0);
}
