#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

#include "fkqho/gaussian.hpp"

#include <cmath>

using namespace fkqho;
using namespace fkqho::testing;

namespace {

GaussianState g1(double m, double v) {
  return {VectorXd::Constant(1, m), MatrixXd::Constant(1, 1, v)};
}

}  // namespace

TEST_CASE("relative entropy closed form") {
  CHECK(gaussian_kl(g1(0.3, 1.2), g1(0.3, 1.2)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gaussian_kl(g1(0, 1), g1(0, 2)) ==
        doctest::Approx(0.5 * (0.5 - 1.0 + std::log(2.0))));
  CHECK(gaussian_kl(g1(1, 1), g1(0, 1)) == doctest::Approx(0.5));
  CHECK(gaussian_kl(g1(0, 1), g1(0, 2)) != gaussian_kl(g1(0, 2), g1(0, 1)));

  StreamRng rng(1, 0, 0);
  for (int k = 0; k < 20; ++k) {
    const GaussianState a{random_vector(rng, 3), random_spd(rng, 3)};
    const GaussianState b{random_vector(rng, 3), random_spd(rng, 3)};
    CHECK(gaussian_kl(a, b) >= 0.0);
  }
}

TEST_CASE("wasserstein-2 closed form") {
  CHECK(gaussian_w2(g1(0.5, 2.0), g1(0.5, 2.0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gaussian_w2(g1(0, 1), g1(0, 4)) == doctest::Approx(1.0));

  // Equal covariances: translation coupling.
  StreamRng rng(2, 0, 0);
  const MatrixXd p = random_spd(rng, 3);
  const VectorXd m1 = random_vector(rng, 3), m2 = random_vector(rng, 3);
  CHECK(gaussian_w2({m1, p}, {m2, p}) == doctest::Approx((m1 - m2).norm()).epsilon(1e-10));

  // Works with a Dirac argument.
  CHECK(gaussian_w2(GaussianState::dirac(VectorXd::Zero(1)), g1(0, 1)) ==
        doctest::Approx(1.0));
}

TEST_CASE("fisher information closed form and monte carlo oracle") {
  CHECK(gaussian_fisher(g1(0.2, 0.8), g1(0.2, 0.8)) == doctest::Approx(0.0));
  CHECK(gaussian_fisher(g1(1, 1), g1(0, 1)) == doctest::Approx(1.0));

  // E ||grad log(d nu1 / d nu2)||^2 under nu1 by plain Monte Carlo.
  const GaussianState nu1{(VectorXd(2) << 0.4, -0.3).finished(),
                          (MatrixXd(2, 2) << 1.1, 0.2, 0.2, 0.7).finished()};
  const GaussianState nu2{(VectorXd(2) << -0.1, 0.2).finished(),
                          (MatrixXd(2, 2) << 0.9, -0.1, -0.1, 1.4).finished()};
  const MatrixXd half = sqrt_psd(nu1.cov);
  const MatrixXd p1_inv = nu1.cov.inverse(), p2_inv = nu2.cov.inverse();
  StreamRng rng(3, 0, 0);
  const int n = 1000000;
  double acc = 0.0, acc2 = 0.0;
  for (int k = 0; k < n; ++k) {
    VectorXd z(2);
    z << rng.normal(), rng.normal();
    const VectorXd x = nu1.mean + half * z;
    const VectorXd score = -p1_inv * (x - nu1.mean) + p2_inv * (x - nu2.mean);
    const double v = score.squaredNorm();
    acc += v;
    acc2 += v * v;
  }
  const double mc = acc / n;
  const double se = std::sqrt((acc2 / n - mc * mc) / n);
  const double exact = gaussian_fisher(nu1, nu2);
  CHECK(std::abs(exact - mc) <= 3.0 * se);

  // Weighted variant reduces to the plain one at W = I.
  CHECK(gaussian_fisher_weighted(nu1, nu2, MatrixXd::Identity(2, 2)) ==
        doctest::Approx(exact));
}

TEST_CASE("log quadratic moment") {
  // 1D: E[exp(-q X^2 / 2)] for X ~ N(m, p).
  const double p = 0.8, q = 1.3, m = 0.7;
  const double expected =
      -0.5 * std::log(1.0 + p * q) - 0.5 * m * m * q / (1.0 + p * q);
  CHECK(log_quadratic_moment(g1(m, p), MatrixXd::Constant(1, 1, q)) ==
        doctest::Approx(expected).epsilon(1e-12));

  // Dirac: the moment is exp(-m'Qm/2) exactly.
  CHECK(log_quadratic_moment(GaussianState::dirac(VectorXd::Constant(1, 2.0)),
                             MatrixXd::Constant(1, 1, 0.5)) == doctest::Approx(-1.0));

  // Non-integrable tilt throws.
  CHECK_THROWS_AS(log_quadratic_moment(g1(0, 1), MatrixXd::Constant(1, 1, -2.0)),
                  std::domain_error);

  // Quadrature oracle in 1D for a negative (but integrable) tilt.
  const double qn = -0.4;
  auto integrand = [&](double x) {
    return std::exp(-0.5 * qn * x * x) * std::exp(-0.5 * (x - m) * (x - m) / p) /
           std::sqrt(2.0 * M_PI * p);
  };
  const double quad = scalar_quadrature(integrand, -40.0, 40.0, 20000);
  CHECK(log_quadratic_moment(g1(m, p), MatrixXd::Constant(1, 1, qn)) ==
        doctest::Approx(std::log(quad)).epsilon(1e-9));
}

TEST_CASE("gaussian state validation") {
  GaussianState bad{VectorXd::Zero(2), (MatrixXd(2, 2) << 1, 0.5, -0.5, 1).finished()};
  CHECK_THROWS_AS(check_gaussian(bad), std::domain_error);
  GaussianState negative{VectorXd::Zero(1), MatrixXd::Constant(1, 1, -0.1)};
  CHECK_THROWS_AS(check_gaussian(negative), std::domain_error);
  CHECK_NOTHROW(check_gaussian(g1(0, 0)));
}
