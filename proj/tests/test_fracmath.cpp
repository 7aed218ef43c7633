#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mbm/fracmath.hpp"
#include "mbm/rng.hpp"

using namespace mbm;

TEST_CASE("gamma_small reference values") {
  CHECK(gamma_small(0.75, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(gamma_small(0.5, 3.0) == doctest::Approx(0.0).scale(1).epsilon(1e-14));
  // 2^{1/2} - 2, evaluated directly from the definition at H=1/4, h=1
  CHECK(gamma_small(0.25, 1.0) ==
        doctest::Approx(std::sqrt(2.0) - 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_small(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_small(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_small(-0.2, 1.0), std::invalid_argument);
}

TEST_CASE("gamma_big table at H=1/2 and symmetry") {
  CHECK(gamma_big(0.5, 0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(gamma_big(0.5, 1) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(gamma_big(0.5, 5) == doctest::Approx(0.0).scale(1).epsilon(1e-14));
  for (double h = 0.05; h < 0.96; h += 0.05)
    for (long lag = 0; lag <= 50; ++lag) {
      CHECK(gamma_big(h, lag) == doctest::Approx(gamma_big(h, -lag)).epsilon(1e-12));
      CHECK(gamma_small(h, double(lag)) ==
            doctest::Approx(gamma_small(h, -double(lag))).epsilon(1e-12));
    }
}

TEST_CASE("gamma_big decay |h|^{2H-4}") {
  for (double h : {0.2, 0.5, 0.8}) {
    const double c10 = std::abs(gamma_big(h, 10)) * std::pow(10.0, 4.0 - 2.0 * h);
    for (long lag = 10; lag <= 1000; lag += 37) {
      const double bound = 1.25 * c10 * std::pow(double(lag), 2.0 * h - 4.0);
      CHECK(std::abs(gamma_big(h, lag)) <= bound);
    }
  }
}

TEST_CASE("gamma_bar reference values and structure") {
  const Eigen::Matrix2d m0 = gamma_bar(0.5, 0);
  CHECK(m0(0, 0) == doctest::Approx(4.0));
  CHECK(m0(0, 1) == doctest::Approx(2.0));
  CHECK(m0(1, 0) == doctest::Approx(2.0));
  CHECK(m0(1, 1) == doctest::Approx(4.0));
  CHECK(gamma_bar(0.5, 3).cwiseAbs().maxCoeff() == doctest::Approx(0.0).scale(1));

  auto eng = rng::make_engine(11);
  std::uniform_real_distribution<double> uh(0.05, 0.95);
  std::uniform_int_distribution<long> ul(-20, 20);
  for (int k = 0; k < 100; ++k) {
    const double h = uh(eng);
    const long lag = ul(eng);
    const Eigen::Matrix2d m = gamma_bar(h, lag);
    const double e22 = 2.0 * gamma_big(h, lag) + gamma_big(h, lag - 1) + gamma_big(h, lag + 1);
    CHECK(m(1, 1) == doctest::Approx(e22).epsilon(1e-13));
  }
}

TEST_CASE("sigma_matrix is twice the entry-wise square") {
  const Eigen::Matrix2d s0 = sigma_matrix(0.5, 0);
  CHECK(s0(0, 0) == doctest::Approx(32.0));
  CHECK(s0(0, 1) == doctest::Approx(8.0));
  CHECK(s0(1, 0) == doctest::Approx(8.0));
  CHECK(s0(1, 1) == doctest::Approx(32.0));
  CHECK(sigma_matrix(0.5, 4).cwiseAbs().maxCoeff() == doctest::Approx(0.0).scale(1));

  auto eng = rng::make_engine(12);
  std::uniform_real_distribution<double> uh(0.05, 0.95);
  std::uniform_int_distribution<long> ul(-30, 30);
  for (int k = 0; k < 50; ++k) {
    const double h = uh(eng);
    const long lag = ul(eng);
    const Eigen::Matrix2d direct = 2.0 * gamma_bar(h, lag).array().square().matrix();
    const Eigen::Matrix2d sm = sigma_matrix(h, lag);
    CHECK((sm - direct).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + sm.cwiseAbs().maxCoeff()));
    CHECK(sm.minCoeff() >= 0.0);
  }
}

TEST_CASE("frequency-halving identity from gamma_bar entries") {
  // Var(chi~)/Var(chi) = 2^{2H}; chi~ = chi_i + 2 chi_{i-1} + chi_{i-2}, so
  // Var(chi~) = e22(-1) + 2 e22(0) + e22(1) in terms of gamma_bar entries.
  for (double h : {0.3, 0.5, 0.7}) {
    const double var_chi = gamma_bar(h, 0)(0, 0);
    const double var_tilde =
        gamma_bar(h, -1)(1, 1) + 2.0 * gamma_bar(h, 0)(1, 1) + gamma_bar(h, 1)(1, 1);
    CHECK(var_tilde / var_chi == doctest::Approx(std::pow(2.0, 2.0 * h)).epsilon(1e-10));
  }
}

TEST_CASE("tau_squared closed form at H=1/2") {
  CHECK(tau_squared(0.5) == doctest::Approx(0.4375).epsilon(1e-12));
  const double a = tau_squared(0.5, {2, 1e-6});
  const double b = tau_squared(0.5, {100, 1e-6});
  CHECK(std::abs(a - b) <= 1e-15);
  CHECK(a == doctest::Approx(0.4375).epsilon(1e-12));
}

TEST_CASE("tau_squared is positive and continuous in H") {
  for (double h = 0.05; h < 0.955; h += 0.05) {
    const double t = tau_squared(h);
    CHECK(t > 0.0);
    CHECK(std::abs(tau_squared(h + 1e-4) - t) <= 1e-2);
  }
  CHECK_THROWS_AS(tau_squared(0.5, {1, 1e-10}), std::invalid_argument);
  CHECK_THROWS_AS(tau_squared(0.5, {100, -1.0}), std::invalid_argument);
}

TEST_CASE("Tau2Table matches direct evaluation") {
  const Tau2Table table(0.01, 0.99, 1024);
  auto eng = rng::make_engine(13);
  std::uniform_real_distribution<double> uh(0.02, 0.98);
  for (int k = 0; k < 40; ++k) {
    const double h = uh(eng);
    CHECK(table(h) == doctest::Approx(tau_squared(h)).epsilon(1e-5));
  }
}

TEST_CASE("squares of jointly Gaussian variables: Cov(X^2,Y^2) = 2 Cov(X,Y)^2") {
  auto eng = rng::make_engine(14);
  std::normal_distribution<double> gauss;
  const int reps = 200000;
  for (double rho : {0.0, 0.5, 0.9}) {
    double su = 0, sv = 0, suv = 0, s2 = 0;
    std::vector<double> prods(reps);
    std::vector<double> us(reps), vs(reps);
    for (int i = 0; i < reps; ++i) {
      const double z1 = gauss(eng), z2 = gauss(eng);
      const double x = z1;
      const double y = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
      us[i] = x * x;
      vs[i] = y * y;
      su += us[i];
      sv += vs[i];
    }
    const double mu = su / reps, mv = sv / reps;
    for (int i = 0; i < reps; ++i) {
      const double p = (us[i] - mu) * (vs[i] - mv);
      suv += p;
      s2 += p * p;
    }
    const double cov = suv / reps;
    const double se = std::sqrt((s2 / reps - cov * cov) / reps);
    CHECK(std::abs(cov - 2.0 * rho * rho) <= 4.0 * se + 1e-12);
  }
}
