// Second-order increments, local moment and Hurst estimators, the integrated
// Hurst estimator with its one-step correction, and the plug-in variance
// curve that studentizes it.
#pragma once

#include <Eigen/Core>

#include "mbm/core.hpp"
#include "mbm/fracmath.hpp"
#include "mbm/localpoly.hpp"

namespace mbm {

// chi[i-1]  = X_{i/n} - 2 X_{(i-1)/n} + X_{(i-2)/n}
// chi~[i-1] = X_{i/n} - 2 X_{(i-2)/n} + X_{(i-4)/n},  i = 1..n
struct IncrementPair {
  int n = 0;
  Eigen::VectorXd chi;
  Eigen::VectorXd chi_tilde;
};

IncrementPair increments(const SamplePath& path);

struct EstimatorParams {
  Kernel kernel{KernelShape::epanechnikov, KernelSupport::two_sided};
  double bandwidth = 0;         // explicit b_n; 0 means use the rule below
  double bandwidth_const = 1.0; // b_n = c * n^{-1/(2 eta + 1)}
  double eta = 1.0;             // declared Hoelder exponent of theta
  int degree = 1;
  // Degree of the one-sided fits inside the integrated estimator. Local
  // constant by default: edge-evaluated higher-degree fits have negative
  // weights and O(1) relative noise on squared increments, which lets the
  // moment estimates dip towards zero and wrecks the studentized statistic.
  int integrated_degree = 0;
  // Lower clamp for the moment smooth, relative to the window mean of chi^2.
  // Keeps the correction ratios of the integrated estimator bounded,
  // mirroring the event the limit theory works on.
  double epsilon_floor = 0.2;
  int lag = 0;  // L_n; 0 means ceil(n^0.3)

  double bandwidth_for(int n) const;
  int lag_for(int n) const;
};

struct MomentPair {
  double phi1 = 0;
  double phi2 = 0;
  bool clamped1 = false;
  bool clamped2 = false;
};

struct EstimatorDiagnostics {
  int clip_count = 0;            // raw log-ratio outside [0,1]
  int clamp_count = 0;           // phi components lifted to the floor
  int excluded_log_entries = 0;  // nonpositive ratios dropped in smoothed-log
  bool reliability_warning = false;  // >10% of some window excluded
  double bandwidth_used = 0;
  int lag_used = 0;
};

enum class HurstMethod { log_ratio, smoothed_log };

struct HurstCurve {
  Eigen::VectorXd u;
  Eigen::VectorXd value;  // clipped to [0,1]
  HurstMethod method = HurstMethod::log_ratio;
};

// Hhat(u) = value[floor(u n)]; zero before start = 2 L_n.
struct IntegratedCurve {
  int n = 0;
  int start = 0;
  Eigen::VectorXd u;      // k/n, k = 0..n
  Eigen::VectorXd value;

  double at(double uu) const;
};

struct VarCurve {
  int n = 0;
  int start = 0;
  Eigen::VectorXd u;
  Eigen::VectorXd value;  // nondecreasing, value[0] = 0

  double at(double uu) const;
};

// Component-wise local polynomial smooth of (chi^2, chi~^2) at u, clamped
// below at epsilon_floor times the window mean of chi^2.
MomentPair phi_hat(const IncrementPair& inc, const EstimatorParams& params, double u);

// Hhat(u) = clip_[0,1]( log2(phi2/phi1) / 2 ) on the given grid.
HurstCurve hurst_log_ratio(const IncrementPair& inc, const EstimatorParams& params,
                           const Eigen::VectorXd& u_grid,
                           EstimatorDiagnostics* diag = nullptr);

// Ratio first, smooth second: clip_[0,1]( sum_i w_i log2(chi~_i^2/chi_i^2) / 2 ).
// Nonpositive ratios are excluded with weight renormalization.
HurstCurve hurst_smoothed_log(const IncrementPair& inc, const EstimatorParams& params,
                              const Eigen::VectorXd& u_grid,
                              EstimatorDiagnostics* diag = nullptr);

// Integrated estimator: Riemann sum of the lagged local estimate plus its
// first-order moment correction; requires a left-supported kernel so every
// weight factor depends only on strictly older data.
IntegratedCurve integrated_hurst(const IncrementPair& inc, const EstimatorParams& params,
                                 EstimatorDiagnostics* diag = nullptr);

// Plug-in variance clock: cumulative average of tau^2 along a Hurst curve
// sampled on the grid {t/n : t = 2L..n}; values nudged into [0.01, 0.99]
// before tau^2 evaluation.
VarCurve variance_curve(const HurstCurve& hurst, const EstimatorParams& params,
                        const AsymVarConfig& cfg = {});

// One shared pass computing the local fits once: the integrated curve, the
// lag-free Hurst curve on {t/n}, and the variance clock.
struct IntegratedPipeline {
  IntegratedCurve curve;
  HurstCurve hurst_now;
  VarCurve varcurve;
  EstimatorDiagnostics diag;
};
IntegratedPipeline integrated_pipeline(const IncrementPair& inc,
                                       const EstimatorParams& params,
                                       const AsymVarConfig& cfg = {});

}  // namespace mbm
