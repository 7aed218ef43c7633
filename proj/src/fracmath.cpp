#include "mbm/fracmath.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mbm {

namespace {

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::invalid_argument("hurst must lie in (0,1), got " + std::to_string(hurst));
}

// Gamma_H(k) for k = 0..count-1, computed from one shared power table.
Eigen::VectorXd gamma_big_table(double hurst, long count) {
  const long np = count + 3;
  Eigen::VectorXd p(np);
  for (long k = 0; k < np; ++k) p[k] = std::pow(double(k), 2.0 * hurst);
  auto gam = [&](long k) {  // gamma_H(|k|)
    k = std::labs(k);
    return p[k + 1] - 2.0 * p[k] + p[k - 1 < 0 ? 1 : k - 1];
  };
  Eigen::VectorXd g(count);
  for (long k = 0; k < count; ++k)
    g[k] = -gam(k + 1) + 2.0 * gam(k) - gam(k - 1);
  return g;
}

}  // namespace

double gamma_small(double hurst, double h) {
  check_hurst(hurst);
  auto p = [&](double x) { return std::pow(std::abs(x), 2.0 * hurst); };
  return p(h + 1.0) - 2.0 * p(h) + p(h - 1.0);
}

double gamma_big(double hurst, long h) {
  check_hurst(hurst);
  const double hd = double(h);
  return -gamma_small(hurst, hd + 1.0) + 2.0 * gamma_small(hurst, hd) -
         gamma_small(hurst, hd - 1.0);
}

Eigen::Matrix2d gamma_bar(double hurst, long h) {
  const double g0 = gamma_big(hurst, h);
  const double gp = gamma_big(hurst, h + 1);
  const double gm = gamma_big(hurst, h - 1);
  Eigen::Matrix2d m;
  m << g0, g0 + gp, g0 + gm, 2.0 * g0 + gm + gp;
  return m;
}

Eigen::Matrix2d sigma_matrix(double hurst, long h) {
  return 2.0 * gamma_bar(hurst, h).array().square().matrix();
}

double tau_squared(double hurst, const AsymVarConfig& cfg) {
  check_hurst(hurst);
  if (cfg.h_max < 2) throw std::invalid_argument("AsymVarConfig.h_max must be >= 2");
  if (!(cfg.tail_tol > 0)) throw std::invalid_argument("AsymVarConfig.tail_tol must be > 0");

  constexpr long kMaxLag = 1L << 21;
  long hmax = cfg.h_max;
  double tau2 = 0.0;
  for (;;) {
    const Eigen::VectorXd g = gamma_big_table(hurst, hmax + 2);
    auto G = [&](long k) { return g[std::labs(k)]; };
    const double w1 = std::pow(2.0, -4.0 * hurst);
    const double w2 = std::pow(2.0, 1.0 - 2.0 * hurst);
    double sum = 0.0;
    for (long h = -hmax; h <= hmax; ++h) {
      const double a = G(h);
      const double b = 2.0 * G(h) + G(h - 1) + G(h + 1);
      const double c = G(h) + G(h - 1);
      sum += a * a + w1 * b * b - w2 * c * c;
    }
    const double g0 = g[0];
    tau2 = sum / (2.0 * g0 * g0);

    // Tail: |Gamma_H(h)| <= C |h|^{2H-4} with C fitted at the truncation lag;
    // each neglected term is bounded by a fixed multiple of Gamma^2.
    const double c_fit = std::abs(g[hmax]) * std::pow(double(hmax), 4.0 - 2.0 * hurst);
    const double tail = 50.0 * c_fit * c_fit *
                        std::pow(double(hmax), 4.0 * hurst - 7.0) /
                        ((7.0 - 4.0 * hurst) * g0 * g0);
    if (tail <= cfg.tail_tol || hmax >= kMaxLag) break;
    hmax *= 2;
  }
  if (!(tau2 > 0.0))
    throw std::runtime_error("tau_squared: non-positive value " + std::to_string(tau2) +
                             " at H=" + std::to_string(hurst));
  return tau2;
}

double integrated_lrv(double hurst, const AsymVarConfig& cfg) {
  check_hurst(hurst);
  if (cfg.h_max < 2) throw std::invalid_argument("AsymVarConfig.h_max must be >= 2");
  if (!(cfg.tail_tol > 0)) throw std::invalid_argument("AsymVarConfig.tail_tol must be > 0");

  constexpr long kMaxLag = 1L << 21;
  const double ln2 = std::log(2.0);
  long hmax = cfg.h_max;
  double lrv = 0.0;
  for (;;) {
    const Eigen::VectorXd g = gamma_big_table(hurst, hmax + 4);
    auto G = [&](long k) { return g[std::labs(k)]; };
    // autocovariance of chi~ and the chi/chi~ cross-covariance, from the
    // (1,2,1) composition
    auto ctilde = [&](long h) {
      return 6.0 * G(h) + 4.0 * (G(h + 1) + G(h - 1)) + G(h + 2) + G(h - 2);
    };
    auto cross = [&](long h) { return G(h) + 2.0 * G(h + 1) + G(h + 2); };
    const double w4 = std::pow(2.0, -4.0 * hurst);
    const double w2 = std::pow(2.0, -2.0 * hurst);
    double sum = 0.0;
    for (long h = -hmax; h <= hmax; ++h) {
      const double a = G(h);
      const double b = ctilde(h);
      const double m1 = cross(h), m2 = cross(-h);
      sum += a * a + w4 * b * b - w2 * (m1 * m1 + m2 * m2);
    }
    const double g0 = g[0];
    lrv = sum / (2.0 * ln2 * ln2 * g0 * g0);

    const double c_fit = std::abs(g[hmax]) * std::pow(double(hmax), 4.0 - 2.0 * hurst);
    const double tail = 400.0 * c_fit * c_fit *
                        std::pow(double(hmax), 4.0 * hurst - 7.0) /
                        ((7.0 - 4.0 * hurst) * g0 * g0);
    if (tail <= cfg.tail_tol || hmax >= kMaxLag) break;
    hmax *= 2;
  }
  if (!(lrv > 0.0))
    throw std::runtime_error("integrated_lrv: non-positive value " + std::to_string(lrv) +
                             " at H=" + std::to_string(hurst));
  return lrv;
}

Tau2Table::Tau2Table(double h_lo, double h_hi, int points, const AsymVarConfig& cfg)
    : lo_(h_lo), hi_(h_hi) {
  if (!(h_lo > 0 && h_hi < 1 && h_lo < h_hi) || points < 2)
    throw std::invalid_argument("Tau2Table: need 0 < h_lo < h_hi < 1 and points >= 2");
  step_ = (hi_ - lo_) / (points - 1);
  val_.resize(points);
  for (int i = 0; i < points; ++i) val_[i] = tau_squared(lo_ + i * step_, cfg);
}

double Tau2Table::operator()(double hurst) const {
  if (hurst <= lo_) return val_[0];
  if (hurst >= hi_) return val_[val_.size() - 1];
  const double pos = (hurst - lo_) / step_;
  const int i = std::min<int>(int(pos), int(val_.size()) - 2);
  const double frac = pos - i;
  return val_[i] + frac * (val_[i + 1] - val_[i]);
}

}  // namespace mbm
