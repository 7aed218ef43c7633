#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mbm/localpoly.hpp"
#include "mbm/rng.hpp"

using namespace mbm;

namespace {

void check_properties(const WeightVector& wv, int n, double u, double b, int degree) {
  // (iv) unit sum and vanishing moments
  CHECK(std::abs(wv.w.sum() - 1.0) <= 1e-9);
  for (int k = 1; k <= degree; ++k) {
    double moment = 0.0;
    for (int i = 0; i < wv.w.size(); ++i) {
      const double off = double(wv.first + i) / n - u;
      moment += wv.w[i] * std::pow(off, k);
    }
    CHECK(std::abs(moment) <= 1e-9);
  }
  // (iii) support
  for (int i = 0; i < wv.w.size(); ++i) {
    const double off = double(wv.first + i) / n - u;
    CHECK(std::abs(off) <= b + 1e-12);
  }
  // (i), (ii) with a generous universal constant
  const double c_bound = 30.0;
  CHECK(wv.w.cwiseAbs().maxCoeff() <= c_bound / (n * b));
  CHECK(wv.w.cwiseAbs().sum() <= c_bound);
}

}  // namespace

TEST_CASE("uniform kernel, degree 0: local constant average") {
  const Kernel k(KernelShape::uniform);
  const WeightVector wv = weights(k, 256, 0.5, 0.1, 0);
  const int m = int(wv.w.size());
  for (int i = 0; i < m; ++i) CHECK(wv.w[i] == doctest::Approx(1.0 / m).epsilon(1e-12));
}

TEST_CASE("weight properties across degrees, supports, sizes") {
  for (int n : {256, 4096}) {
    const double b = std::pow(double(n), -1.0 / 3.0);
    for (int degree : {0, 1, 2, 3}) {
      for (KernelSupport support :
           {KernelSupport::two_sided, KernelSupport::left, KernelSupport::right}) {
        const Kernel k(KernelShape::epanechnikov, support);
        const double lo = support == KernelSupport::right ? 0.0 : b;
        const double hi = support == KernelSupport::left ? 1.0 : 1.0 - b;
        for (double u : {lo, 0.3, 0.52, 0.77, hi}) {
          if (u < lo || u > hi) continue;
          check_properties(weights(k, n, u, b, degree), n, u, b, degree);
        }
      }
    }
  }
}

TEST_CASE("polynomial reproduction oracle") {
  auto eng = rng::make_engine(31);
  std::uniform_real_distribution<double> uc(-2.0, 2.0);
  const int n = 512;
  const double b = 0.08;
  for (int degree : {0, 1, 2, 3}) {
    Eigen::VectorXd coef(degree + 1);
    for (int j = 0; j <= degree; ++j) coef[j] = uc(eng);
    auto poly = [&](double x) {
      double acc = 0.0, p = 1.0;
      for (int j = 0; j <= degree; ++j) {
        acc += coef[j] * p;
        p *= x;
      }
      return acc;
    };
    Eigen::VectorXd y(n);
    for (int i = 1; i <= n; ++i) y[i - 1] = poly(double(i) / n);
    for (double u : {0.2, 0.5, 0.9}) {
      const Kernel k(KernelShape::triangular);
      const WeightVector wv = weights(k, n, u, b, degree);
      CHECK(smooth(wv, y) == doctest::Approx(poly(u)).epsilon(1e-8));
    }
  }
}

TEST_CASE("smooth basics and brute-force oracle") {
  const int n = 300;
  const Kernel k(KernelShape::epanechnikov);
  const WeightVector wv = weights(k, n, 0.4, 0.12, 1);

  CHECK(smooth(wv, Eigen::VectorXd::Constant(n, 3.25)) ==
        doctest::Approx(3.25).epsilon(1e-12));

  Eigen::VectorXd affine(n);
  for (int i = 1; i <= n; ++i) affine[i - 1] = 2.0 - 5.0 * double(i) / n;
  CHECK(smooth(wv, affine) == doctest::Approx(2.0 - 5.0 * 0.4).epsilon(1e-10));

  auto eng = rng::make_engine(32);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd y(n), y2(n);
  for (int i = 0; i < n; ++i) {
    y[i] = gauss(eng);
    y2[i] = gauss(eng);
  }
  double brute = 0.0;
  for (int i = 0; i < wv.w.size(); ++i) brute += wv.w[i] * y[wv.first - 1 + i];
  CHECK(smooth(wv, y) == doctest::Approx(brute).epsilon(1e-12));

  const Eigen::Vector2d pair = smooth(wv, y, y2);
  CHECK(pair[0] == doctest::Approx(smooth(wv, y)).epsilon(1e-15));
  CHECK(pair[1] == doctest::Approx(smooth(wv, y2)).epsilon(1e-15));

  CHECK_THROWS_AS(smooth(wv, Eigen::VectorXd::Zero(10)), std::invalid_argument);
}

TEST_CASE("one-sided kernels cover their boundary") {
  const int n = 1024;
  const double b = 0.05;
  const Kernel left(KernelShape::epanechnikov, KernelSupport::left);
  check_properties(weights(left, n, 1.0, b, 1), n, 1.0, b, 1);
  const Kernel right(KernelShape::uniform, KernelSupport::right);
  check_properties(weights(right, n, 0.0, b, 1), n, 0.0, b, 1);
  // left-supported window at u uses only observations i/n <= u
  const WeightVector wv = weights(left, n, 0.5, b, 1);
  CHECK(double(wv.last()) / n <= 0.5 + 1e-12);
}

TEST_CASE("custom sampled kernel normalizes and works") {
  Eigen::VectorXd samples(5);
  samples << 0.0, 1.0, 2.0, 1.0, 0.0;
  const Kernel k = Kernel::custom(samples, KernelSupport::two_sided);
  // trapezoid integral of the interpolant is 1 after normalization
  double integral = 0.0;
  const int grid = 20000;
  for (int i = 0; i < grid; ++i) {
    const double x = -1.0 + 2.0 * (i + 0.5) / grid;
    integral += k(x) * 2.0 / grid;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  check_properties(weights(k, 512, 0.5, 0.1, 1), 512, 0.5, 0.1, 1);
}

TEST_CASE("degenerate windows raise errors naming the window") {
  const Kernel k(KernelShape::epanechnikov);
  CHECK_THROWS_WITH_AS(weights(k, 256, 0.5, 0.001, 1), doctest::Contains("window"),
                       std::runtime_error);
  CHECK_THROWS_AS(weights(k, 256, 1.5, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(weights(k, 256, 0.5, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(weights(k, 256, 0.5, 0.1, -1), std::invalid_argument);
}
