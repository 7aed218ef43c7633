// CUSUM test for a constant Hurst exponent and goodness-of-fit tests over
// candidate classes, both calibrated by Monte-Carlo conditional quantiles of
// the time-changed Brownian limit.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mbm/estimators.hpp"

namespace mbm {

enum class FunctionClassKind { singleton, constant_family, linear_family, sampled_grid };

// Candidate classes for the Hurst function. The linear family is
// {H_v = a v + b : b in (0,1), a+b in (0,1)}; minimization runs over the
// closure of the printed constraint sets (the inf is the same by continuity).
struct FunctionClass {
  FunctionClassKind kind = FunctionClassKind::constant_family;
  Eigen::VectorXd singleton_h;  // sampled on a uniform grid over [0,1]
  double c_lo = 0.0, c_hi = 1.0;
  std::vector<Eigen::VectorXd> candidates;

  static FunctionClass singleton(Eigen::VectorXd h_samples);
  static FunctionClass constants(double lo = 0.0, double hi = 1.0);
  static FunctionClass linear();
  static FunctionClass sampled(std::vector<Eigen::VectorXd> curves);
};

struct McSettings {
  int reps = 10000;
  int grid = 512;
  std::uint64_t seed = 1;
};

struct TestReport {
  std::string test_name;
  double statistic = 0;  // sqrt(n)-scaled
  double quantile = 0;
  double alpha = 0;
  double p_value = 1;
  bool reject = false;
  int mc_reps = 0;
  int n = 0;
  double bandwidth = 0;
  int lag = 0;
  int clip_count = 0;
  double minimizer_a = 0, minimizer_b = 0;  // GOF arg-min parameters

  std::string summary() const;
};

std::string to_json(const TestReport& report);

// sup_u |Hhat(u) - u Hhat(1)| over the curve grid (coarsened to <= 1024
// points); invariant to adding a linear drift.
double cusum_statistic(const IntegratedCurve& curve);

// Empirical 1-alpha quantile of sup_u |W(S(u)) - u W(S(1))| over `reps`
// independent time-changed Brownian paths on a `grid`-point u grid.
double mc_quantile_cusum(const VarCurve& var_curve, double alpha, const McSettings& mc);

// Same without the bridge subtraction: quantile of sup_u |W(S(u))|.
double mc_quantile_gof(const VarCurve& var_curve, double alpha, const McSettings& mc);

// inf over the class of sup_u |Hhat(u) - int_0^u Htilde|; returns the
// statistic and the arg-min parameters ((c,0) for constants, (a,b) for the
// linear family, (index,0) for sampled grids).
std::pair<double, Eigen::Vector2d> gof_statistic(const IntegratedCurve& curve,
                                                 const FunctionClass& cls);

TestReport test_constancy(const SamplePath& path, const EstimatorParams& params,
                          double alpha, const McSettings& mc);

TestReport test_gof(const SamplePath& path, const EstimatorParams& params,
                    const FunctionClass& cls, double alpha, const McSettings& mc);

}  // namespace mbm
