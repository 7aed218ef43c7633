// Path generators: exact fractional Brownian motion via circulant embedding,
// discretized Ito / classical multifractional Brownian motion on a shared
// Brownian mesh, and the time-changed Brownian motion used for Monte-Carlo
// quantiles of the limit laws.
#pragma once

#include <cstdint>

#include "mbm/core.hpp"

namespace mbm {

struct FbmConfig {
  double hurst = 0.5;
  double sigma = 1.0;
  int n = 0;
  int lead_in = 3;
  std::uint64_t seed = 0;
};

// Exact fBm on the observation grid, pinned at X_0 = 0, with
// Cov(X_s, X_t) = (sigma^2/2)(|t|^{2H} + |s|^{2H} - |t-s|^{2H}).
// Synthesis is O(N log N) circulant embedding with a Cholesky fallback.
SamplePath simulate_fbm(const FbmConfig& cfg);

enum class MbmVariant { ito, classical };

struct MbmConfig {
  ThetaFunction theta;
  int n = 0;
  int lead_in = 3;
  double past_horizon = 10.0;  // integral truncated at -past_horizon
  int submesh = 16;            // Brownian sub-steps per observation interval
  MbmVariant variant = MbmVariant::ito;
  std::uint64_t seed = 0;
};

struct MbmDiagnostics {
  double horizon_tail_ratio = 0;  // truncated-tail std relative to path std at t=1
  bool horizon_warning = false;
  int exponent_classes = 0;  // distinct frozen Hurst values on the mesh
  bool fft_path = false;     // convolution fast path used for the bulk cells
};

// X_t = sum_j fbar(t, cell_j) dB_j on a mesh of step 1/(n*submesh) covering
// [-past_horizon, 1]; fbar is the exact cell average of the power kernel with
// theta frozen at the cell midpoint (ito) or the Hurst value frozen at the
// observation time (classical). The Brownian increments are shared across all
// observation times, so increments of the output are jointly consistent.
SamplePath simulate_mbm(const MbmConfig& cfg, MbmDiagnostics* diag = nullptr);

// W evaluated along a nondecreasing variance clock: cumulative sums of
// independent N(0, clock[k] - clock[k-1]) increments.
Eigen::VectorXd simulate_time_changed_bm(const Eigen::VectorXd& variance_clock,
                                         std::uint64_t seed);

}  // namespace mbm
