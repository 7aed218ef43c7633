// Closed-form autocovariances of fractional Gaussian second-order increments
// and the asymptotic variance tau^2(H) of the integrated Hurst estimator.
#pragma once

#include <Eigen/Core>

namespace mbm {

struct AsymVarConfig {
  // Truncation lag for the lag sum in tau^2; enlarged automatically until the
  // analytic tail bound drops below tail_tol.
  long h_max = 1000;
  double tail_tol = 1e-10;
};

// gamma_H(h) = |h+1|^{2H} - 2|h|^{2H} + |h-1|^{2H}, the autocovariance
// pattern of fBm increments at unit step. Even in h; |0|^{2H} = 0.
double gamma_small(double hurst, double h);

// Gamma_H(h) = -gamma_H(h+1) + 2 gamma_H(h) - gamma_H(h-1): autocovariance
// pattern of second-order increments. Decays like |h|^{2H-4}.
double gamma_big(double hurst, long h);

// 2x2 cross-covariance pattern of (chi_i, chi~_i) at lag h, where
// chi~_i = chi_i + 2 chi_{i-1} + chi_{i-2}.
Eigen::Matrix2d gamma_bar(double hurst, long h);

// Covariance pattern of the squared pair: twice the entry-wise square of
// gamma_bar (squares of jointly Gaussian variables).
Eigen::Matrix2d sigma_matrix(double hurst, long h);

// Local asymptotic variance function tau^2(H) in its commonly printed form.
double tau_squared(double hurst, const AsymVarConfig& cfg = {});

// Long-run variance of the integrated estimator's linearized summands
// (1/(2 ln 2)) (chi~_t^2 / E chi~^2 - chi_t^2 / E chi^2), computed from the
// full second-order increment autocovariances: chi~_t = chi_t + 2 chi_{t-1}
// + chi_{t-2}, so its autocovariance and the cross term are the (1,2,1)
// compositions of Gamma_H, and the log2 derivative contributes 1/ln2.
// This is the function the plug-in variance clock has to use: Monte Carlo on
// exact fBm reproduces it, while the shorter printed form of tau^2 above
// underestimates the variance of the statistic by a large factor.
double integrated_lrv(double hurst, const AsymVarConfig& cfg = {});

// tau^2 sampled on a uniform H grid with linear interpolation; tau^2 is
// smooth, so a few thousand points give far more accuracy than the plug-in
// needs while making per-observation evaluation cheap.
class Tau2Table {
 public:
  Tau2Table(double h_lo, double h_hi, int points, const AsymVarConfig& cfg = {});
  double operator()(double hurst) const;
  double h_lo() const { return lo_; }
  double h_hi() const { return hi_; }

 private:
  double lo_ = 0, hi_ = 0, step_ = 0;
  Eigen::VectorXd val_;
};

}  // namespace mbm
