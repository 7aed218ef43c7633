#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mbm/estimators.hpp"
#include "mbm/rng.hpp"
#include "mbm/simulate.hpp"

using namespace mbm;

namespace {
ThetaFunction const_theta(double hurst, double sigma = 1.0, int m = 2) {
  return ThetaFunction(Eigen::VectorXd::Constant(m, hurst),
                       Eigen::VectorXd::Constant(m, sigma), 1.0);
}
}  // namespace

TEST_CASE("fbm: determinism and basic shape") {
  const FbmConfig cfg{0.7, 1.3, 512, 3, 42};
  const SamplePath a = simulate_fbm(cfg);
  const SamplePath b = simulate_fbm(cfg);
  REQUIRE(a.values.size() == 512 + 3 + 1);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.values[a.grid.index_of_zero()] == 0.0);
  const SamplePath c = simulate_fbm({0.7, 1.3, 512, 3, 43});
  CHECK((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("fbm: H=1/2 increments are white") {
  const int n = 65536;
  const SamplePath path = simulate_fbm({0.5, 1.0, n, 3, 7});
  const int len = n + 3;
  Eigen::VectorXd inc(len);
  for (int j = 0; j < len; ++j) inc[j] = path.values[j + 1] - path.values[j];
  const double mean = inc.mean();
  double c0 = 0, c1 = 0;
  for (int j = 0; j + 1 < len; ++j) {
    c0 += (inc[j] - mean) * (inc[j] - mean);
    c1 += (inc[j] - mean) * (inc[j + 1] - mean);
  }
  CHECK(std::abs(c1 / c0) <= 4.0 / std::sqrt(double(len)));
  // Var of a single increment is sigma^2/n
  CHECK(c0 / len == doctest::Approx(1.0 / n).epsilon(0.05));
}

TEST_CASE("fbm: Var(X_1) matches sigma^2 over replications (H=0.7)") {
  const int n = 4096, reps = 200;
  const double sigma = 0.8;
  double s2 = 0;
  for (int r = 0; r < reps; ++r) {
    const SamplePath path = simulate_fbm({0.7, sigma, n, 3, rng::derive(100, r)});
    const double x1 = path.values[path.values.size() - 1];
    s2 += x1 * x1;
  }
  const double var = s2 / reps;
  const double se = sigma * sigma * std::sqrt(2.0 / reps);
  CHECK(std::abs(var - sigma * sigma) <= 3.0 * se);
}

TEST_CASE("mbm: frequency ratio matches 2^{2H} for constant theta") {
  const int n = 512, reps = 150;
  for (double hurst : {0.3, 0.5, 0.7}) {
    double sum_t2 = 0, sum_c2 = 0;
    for (int r = 0; r < reps; ++r) {
      MbmConfig cfg{const_theta(hurst), n, 3, 5.0, 8, MbmVariant::ito,
                    rng::derive(200, long(hurst * 100), r)};
      const IncrementPair inc = increments(simulate_mbm(cfg));
      sum_c2 += inc.chi.squaredNorm();
      sum_t2 += inc.chi_tilde.squaredNorm();
    }
    const double ratio = sum_t2 / sum_c2;
    CHECK(ratio == doctest::Approx(std::pow(2.0, 2.0 * hurst)).epsilon(0.05));
  }
}

TEST_CASE("mbm: ito and classical coincide for constant theta, same seed") {
  MbmConfig ito{const_theta(0.35), 256, 3, 3.0, 4, MbmVariant::ito, 77};
  MbmConfig classical = ito;
  classical.variant = MbmVariant::classical;
  const SamplePath a = simulate_mbm(ito);
  const SamplePath b = simulate_mbm(classical);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mbm: classical variant with varying H runs and stays finite") {
  Eigen::VectorXd h(3), s(3);
  h << 0.3, 0.5, 0.7;
  s << 1.0, 1.0, 1.0;
  MbmConfig cfg{ThetaFunction(h, s, 1.0), 128, 3, 2.0, 4, MbmVariant::classical, 5};
  MbmDiagnostics diag;
  const SamplePath path = simulate_mbm(cfg, &diag);
  CHECK(validate_path(path).valid());
  CHECK(path.values[path.grid.index_of_zero()] == 0.0);
  CHECK(diag.exponent_classes > 2);
}

TEST_CASE("mbm: path is exactly linear in sigma; tiny sigma gives a null path") {
  MbmConfig one{const_theta(0.6, 1.0), 256, 3, 3.0, 4, MbmVariant::ito, 9};
  MbmConfig two{const_theta(0.6, 2.0), 256, 3, 3.0, 4, MbmVariant::ito, 9};
  const SamplePath a = simulate_mbm(one);
  const SamplePath b = simulate_mbm(two);
  CHECK((b.values - 2.0 * a.values).cwiseAbs().maxCoeff() == 0.0);

  MbmConfig null_sigma{const_theta(0.6, 1e-200), 256, 3, 3.0, 4, MbmVariant::ito, 9};
  CHECK(simulate_mbm(null_sigma).values.cwiseAbs().maxCoeff() <= 1e-150);
}

TEST_CASE("mbm: determinism and the fft/direct split agree") {
  // jump theta: two large exponent classes plus a thin interpolation ramp
  const int m = 513;
  Eigen::VectorXd h(m), s(m);
  for (int i = 0; i < m; ++i) {
    h[i] = (double(i) / (m - 1) < 0.5) ? 0.3 : 0.7;
    s[i] = 1.0;
  }
  MbmConfig cfg{ThetaFunction(h, s, 1.0), 512, 3, 3.0, 4, MbmVariant::ito, 321};
  MbmDiagnostics diag;
  const SamplePath a = simulate_mbm(cfg, &diag);
  const SamplePath b = simulate_mbm(cfg);
  CHECK(diag.fft_path);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(validate_path(a).valid());
}

TEST_CASE("mbm: local frequency ratio approaches 2^{2H_u} for smooth H") {
  // spec-pinned mesh: n=8192, submesh=16, horizon=10; three interior points
  const int n = 8192;
  Eigen::VectorXd h(257), s(257);
  for (int i = 0; i < 257; ++i) {
    const double v = double(i) / 256.0;
    h[i] = 0.4 + 0.3 * v;
    s[i] = 1.0;
  }
  const ThetaFunction theta(h, s, 1.0);
  const double half_window = 0.055;
  double ratio_err_max = 0.0;
  const int paths = 2;
  Eigen::Vector3d sums_c2 = Eigen::Vector3d::Zero(), sums_t2 = Eigen::Vector3d::Zero();
  for (int r = 0; r < paths; ++r) {
    MbmConfig cfg{theta, n, 3, 10.0, 16, MbmVariant::ito, rng::derive(400, r)};
    const IncrementPair inc = increments(simulate_mbm(cfg));
    const double us[3] = {0.3, 0.5, 0.8};
    for (int k = 0; k < 3; ++k) {
      const int lo = int((us[k] - half_window) * n), hi = int((us[k] + half_window) * n);
      for (int i = lo; i <= hi; ++i) {
        sums_c2[k] += inc.chi[i - 1] * inc.chi[i - 1];
        sums_t2[k] += inc.chi_tilde[i - 1] * inc.chi_tilde[i - 1];
      }
    }
  }
  const double us[3] = {0.3, 0.5, 0.8};
  for (int k = 0; k < 3; ++k) {
    const double target = std::pow(2.0, 2.0 * theta.hurst(us[k]));
    const double ratio = sums_t2[k] / sums_c2[k];
    ratio_err_max = std::max(ratio_err_max, std::abs(ratio / target - 1.0));
  }
  CHECK(ratio_err_max <= 0.10);
}

TEST_CASE("mbm: config validation") {
  CHECK_THROWS_AS(simulate_mbm({const_theta(0.5), 4}), std::invalid_argument);
  CHECK_THROWS_AS(simulate_mbm({const_theta(0.5), 256, 3, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(simulate_mbm({const_theta(0.5), 256, 3, 2.0, 0}), std::invalid_argument);
}

TEST_CASE("time-changed Brownian motion") {
  CHECK(simulate_time_changed_bm(Eigen::VectorXd::Zero(100), 5).cwiseAbs().maxCoeff() ==
        0.0);

  Eigen::VectorXd decreasing(3);
  decreasing << 0.0, 0.5, 0.4;
  CHECK_THROWS_AS(simulate_time_changed_bm(decreasing, 5), std::invalid_argument);

  // variance of the final value matches the clock
  const int grid = 64, reps = 4000;
  Eigen::VectorXd clock(grid);
  for (int k = 0; k < grid; ++k) clock[k] = 2.0 * double(k + 1) / grid;
  double s2 = 0;
  for (int r = 0; r < reps; ++r) {
    const Eigen::VectorXd w = simulate_time_changed_bm(clock, rng::derive(500, r));
    s2 += w[grid - 1] * w[grid - 1];
  }
  const double var = s2 / reps;
  CHECK(std::abs(var - 2.0) <= 3.0 * 2.0 * std::sqrt(2.0 / reps));
}

TEST_CASE("time-changed BM: bridge sup quantile near the Kolmogorov point") {
  const int grid = 512, reps = 30000;
  Eigen::VectorXd clock(grid);
  for (int k = 0; k < grid; ++k) clock[k] = double(k + 1) / grid;
  std::vector<double> sups(reps);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < reps; ++r) {
    const Eigen::VectorXd w = simulate_time_changed_bm(clock, rng::derive(600, r));
    double s = 0.0;
    for (int k = 0; k < grid; ++k)
      s = std::max(s, std::abs(w[k] - clock[k] * w[grid - 1]));
    sups[r] = s;
  }
  std::sort(sups.begin(), sups.end());
  const double q95 = sups[int(std::ceil(0.95 * reps)) - 1];
  CHECK(std::abs(q95 - 1.358) <= 0.04);
}
