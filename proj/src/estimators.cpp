#include "mbm/estimators.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbm {

namespace {
constexpr double kInv2Ln2 = 0.72134752044448170368;  // 1 / (2 ln 2)

double clip01(double x) { return std::min(1.0, std::max(0.0, x)); }
}  // namespace

IncrementPair increments(const SamplePath& path) {
  const int n = path.grid.n;
  const int z = path.grid.index_of_zero();
  if (path.grid.lead_in < 3)
    throw std::invalid_argument("increments: lead_in must be >= 3 so that chi~_1 can reach "
                                "X_{-3/n}, got " + std::to_string(path.grid.lead_in));
  if (path.values.size() != path.grid.points())
    throw std::invalid_argument("increments: path length does not match its grid");
  IncrementPair out;
  out.n = n;
  out.chi.resize(n);
  out.chi_tilde.resize(n);
  const auto& v = path.values;
  for (int i = 1; i <= n; ++i) {
    out.chi[i - 1] = v[z + i] - 2.0 * v[z + i - 1] + v[z + i - 2];
    out.chi_tilde[i - 1] = v[z + i] - 2.0 * v[z + i - 2] + v[z + i - 4];
  }
  return out;
}

double EstimatorParams::bandwidth_for(int n) const {
  const double b =
      bandwidth > 0 ? bandwidth : bandwidth_const * std::pow(double(n), -1.0 / (2.0 * eta + 1.0));
  if (!(b > 0 && b < 0.5))
    throw std::invalid_argument("bandwidth " + std::to_string(b) + " outside (0, 1/2)");
  return b;
}

int EstimatorParams::lag_for(int n) const {
  const int L = lag > 0 ? lag : int(std::ceil(std::pow(double(n), 0.3)));
  if (!(double(L) > std::pow(double(n), 1.0 / 6.0) &&
        double(L) < std::pow(double(n), 0.5)))
    throw std::invalid_argument("lag L=" + std::to_string(L) +
                                " outside (n^{1/6}, n^{1/2}) for n=" + std::to_string(n));
  return L;
}

namespace {

// Local fits at the grid points u = j/n for a left-supported kernel. Interior
// windows share one stencil; truncated boundary windows get their own QR.
// Very short boundary windows fall back to a local-constant fit: a degree-l
// edge fit on a handful of points has O(1) relative variance and negative
// weights, which wrecks the moment ratios downstream.
class GridFits {
 public:
  static constexpr int kMinPointsForDegree = 128;

  GridFits(const Kernel& kernel, int n, double b, int degree, int j_lo)
      : n_(n), width_(int(std::floor(double(n) * b + 1e-9))) {
    interior_min_ = width_ + 1;
    for (int j = j_lo; j < interior_min_ && j <= n; ++j) {
      const int deg = j < kMinPointsForDegree ? 0 : degree;
      edge_.emplace(j, weights(kernel, n, double(j) / n, b, deg));
    }
    if (interior_min_ <= n)
      interior_ = weights(kernel, n, double(interior_min_) / n, b, degree);
  }

  // [first, last] 1-based observation window of the fit at u = j/n
  std::pair<int, int> window(int j) const {
    if (j < interior_min_) {
      const auto& wv = edge_.at(j);
      return {wv.first, wv.last()};
    }
    return {j - width_, j};
  }

  double smooth_at(int j, const Eigen::VectorXd& y) const {
    const auto [first, last] = window(j);
    const auto& w = (j < interior_min_) ? edge_.at(j).w : interior_.w;
    return w.dot(y.segment(first - 1, last - first + 1));
  }

  const Eigen::VectorXd& raw_weights(int j) const {
    return (j < interior_min_) ? edge_.at(j).w : interior_.w;
  }

 private:
  int n_ = 0, width_ = 0, interior_min_ = 0;
  std::map<int, WeightVector> edge_;
  WeightVector interior_;
};

MomentPair clamped_pair(double phi1, double phi2, double floor_value) {
  MomentPair mp;
  mp.phi1 = phi1;
  mp.phi2 = phi2;
  if (phi1 < floor_value) {
    mp.phi1 = floor_value;
    mp.clamped1 = true;
  }
  if (phi2 < floor_value) {
    mp.phi2 = floor_value;
    mp.clamped2 = true;
  }
  return mp;
}

double half_log2_ratio(const MomentPair& mp, double u) {
  if (!(mp.phi1 > 0.0) || !(mp.phi2 > 0.0))
    throw std::runtime_error("phi_hat nonpositive at u=" + std::to_string(u) +
                             " (degenerate window)");
  return 0.5 * std::log2(mp.phi2 / mp.phi1);
}

bool is_default(const AsymVarConfig& cfg) {
  return cfg.h_max == AsymVarConfig{}.h_max && cfg.tail_tol == AsymVarConfig{}.tail_tol;
}

// plug-in variance clock evaluations, cached on a fine H grid
double lrv_eval(double hurst, const AsymVarConfig& cfg) {
  const double nudged = std::min(0.99, std::max(0.01, hurst));
  if (!is_default(cfg)) return integrated_lrv(nudged, cfg);
  static const auto table = [] {
    const int points = 2048;
    Eigen::VectorXd v(points);
    for (int i = 0; i < points; ++i)
      v[i] = integrated_lrv(0.005 + i * (0.99 / (points - 1)));
    return v;
  }();
  const double pos = (nudged - 0.005) / (0.99 / 2047.0);
  const int i = std::min(2046, std::max(0, int(pos)));
  const double frac = pos - i;
  return table[i] + frac * (table[i + 1] - table[i]);
}

}  // namespace

MomentPair phi_hat(const IncrementPair& inc, const EstimatorParams& params, double u) {
  const int n = inc.n;
  const double b = params.bandwidth_for(n);
  const WeightVector wv = weights(params.kernel, n, u, b, params.degree);
  const Eigen::VectorXd c2 = inc.chi.array().square();
  const Eigen::VectorXd t2 = inc.chi_tilde.array().square();
  const double phi1 = smooth(wv, c2);
  const double phi2 = smooth(wv, t2);
  const double winmean = c2.segment(wv.first - 1, wv.w.size()).mean();
  return clamped_pair(phi1, phi2, params.epsilon_floor * winmean);
}

HurstCurve hurst_log_ratio(const IncrementPair& inc, const EstimatorParams& params,
                           const Eigen::VectorXd& u_grid, EstimatorDiagnostics* diag) {
  const int n = inc.n;
  const double b = params.bandwidth_for(n);
  const Eigen::VectorXd c2 = inc.chi.array().square();
  const Eigen::VectorXd t2 = inc.chi_tilde.array().square();
  EstimatorDiagnostics d;
  d.bandwidth_used = b;
  HurstCurve curve;
  curve.method = HurstMethod::log_ratio;
  curve.u = u_grid;
  curve.value.resize(u_grid.size());
  for (Eigen::Index k = 0; k < u_grid.size(); ++k) {
    const WeightVector wv = weights(params.kernel, n, u_grid[k], b, params.degree);
    const double winmean = c2.segment(wv.first - 1, wv.w.size()).mean();
    const MomentPair mp = clamped_pair(smooth(wv, c2), smooth(wv, t2),
                                       params.epsilon_floor * winmean);
    d.clamp_count += int(mp.clamped1) + int(mp.clamped2);
    const double raw = half_log2_ratio(mp, u_grid[k]);
    if (raw < 0.0 || raw > 1.0) ++d.clip_count;
    curve.value[k] = clip01(raw);
  }
  if (diag) *diag = d;
  return curve;
}

HurstCurve hurst_smoothed_log(const IncrementPair& inc, const EstimatorParams& params,
                              const Eigen::VectorXd& u_grid, EstimatorDiagnostics* diag) {
  const int n = inc.n;
  const double b = params.bandwidth_for(n);
  Eigen::VectorXd logratio(n);
  std::vector<char> ok(n);
  for (int i = 0; i < n; ++i) {
    const double c2 = inc.chi[i] * inc.chi[i];
    const double t2 = inc.chi_tilde[i] * inc.chi_tilde[i];
    const bool good = c2 > 0.0 && t2 > 0.0;
    ok[i] = good;
    logratio[i] = good ? std::log2(t2 / c2) : 0.0;
  }
  EstimatorDiagnostics d;
  d.bandwidth_used = b;
  HurstCurve curve;
  curve.method = HurstMethod::smoothed_log;
  curve.u = u_grid;
  curve.value.resize(u_grid.size());
  for (Eigen::Index k = 0; k < u_grid.size(); ++k) {
    const WeightVector wv = weights(params.kernel, n, u_grid[k], b, params.degree);
    double acc = 0.0, wsum = 0.0;
    int excluded = 0;
    for (int i = 0; i < wv.w.size(); ++i) {
      const int obs = wv.first - 1 + i;
      if (!ok[obs]) {
        ++excluded;
        continue;
      }
      acc += wv.w[i] * logratio[obs];
      wsum += wv.w[i];
    }
    double val;
    if (excluded == 0) {
      val = acc;
    } else {
      d.excluded_log_entries += excluded;
      if (excluded > wv.w.size() / 10) d.reliability_warning = true;
      if (std::abs(wsum) < 1e-12)
        throw std::runtime_error("hurst_smoothed_log: window at u=" +
                                 std::to_string(u_grid[k]) +
                                 " lost all usable weight after exclusions");
      val = acc / wsum;
    }
    const double raw = 0.5 * val;
    if (raw < 0.0 || raw > 1.0) ++d.clip_count;
    curve.value[k] = clip01(raw);
  }
  if (diag) *diag = d;
  return curve;
}

double IntegratedCurve::at(double uu) const {
  const int k = std::min(n, std::max(0, int(std::floor(uu * n + 1e-9))));
  return value[k];
}

double VarCurve::at(double uu) const {
  const int k = std::min(n, std::max(0, int(std::floor(uu * n + 1e-9))));
  return value[k];
}

IntegratedPipeline integrated_pipeline(const IncrementPair& inc,
                                       const EstimatorParams& params,
                                       const AsymVarConfig& cfg) {
  const int n = inc.n;
  const int L = params.lag_for(n);
  if (n <= 4 * L)
    throw std::invalid_argument("integrated estimator needs n > 4 L_n (n=" +
                                std::to_string(n) + ", L=" + std::to_string(L) + ")");
  if (params.kernel.support() != KernelSupport::left)
    throw std::invalid_argument(
        "integrated estimator requires a kernel supported on [-1,0]");
  const double b = params.bandwidth_for(n);

  const Eigen::VectorXd c2 = inc.chi.array().square();
  const Eigen::VectorXd t2 = inc.chi_tilde.array().square();
  const GridFits fits(params.kernel, n, b, params.integrated_degree, L);

  EstimatorDiagnostics d;
  d.bandwidth_used = b;
  d.lag_used = L;

  auto phi_at = [&](int j) {
    const auto [first, last] = fits.window(j);
    const double winmean = c2.segment(first - 1, last - first + 1).mean();
    MomentPair mp = clamped_pair(fits.smooth_at(j, c2), fits.smooth_at(j, t2),
                                 params.epsilon_floor * winmean);
    d.clamp_count += int(mp.clamped1) + int(mp.clamped2);
    return mp;
  };

  IntegratedPipeline out;
  out.curve.n = n;
  out.curve.start = 2 * L;
  out.curve.u = Eigen::VectorXd::LinSpaced(n + 1, 0.0, 1.0);
  out.curve.value = Eigen::VectorXd::Zero(n + 1);
  out.varcurve.n = n;
  out.varcurve.start = 2 * L;
  out.varcurve.u = out.curve.u;
  out.varcurve.value = Eigen::VectorXd::Zero(n + 1);
  out.hurst_now.method = HurstMethod::log_ratio;
  out.hurst_now.u.resize(n - 2 * L + 1);
  out.hurst_now.value.resize(n - 2 * L + 1);

  double cum = 0.0, varcum = 0.0;
  for (int t = 2 * L; t <= n; ++t) {
    const MomentPair lagged = phi_at(t - L);
    const double raw = half_log2_ratio(lagged, double(t - L) / n);
    if (raw < 0.0 || raw > 1.0) ++d.clip_count;
    const double correction =
        kInv2Ln2 * (t2[t - 1] / lagged.phi2 - c2[t - 1] / lagged.phi1);
    cum += clip01(raw) + correction;
    out.curve.value[t] = cum / n;

    const MomentPair now = phi_at(t);
    const double h_now = clip01(half_log2_ratio(now, double(t) / n));
    out.hurst_now.u[t - 2 * L] = double(t) / n;
    out.hurst_now.value[t - 2 * L] = h_now;
    varcum += lrv_eval(h_now, cfg);
    out.varcurve.value[t] = varcum / n;
  }
  out.diag = d;
  return out;
}

IntegratedCurve integrated_hurst(const IncrementPair& inc, const EstimatorParams& params,
                                 EstimatorDiagnostics* diag) {
  IntegratedPipeline pipe = integrated_pipeline(inc, params);
  if (diag) *diag = pipe.diag;
  return std::move(pipe.curve);
}

VarCurve variance_curve(const HurstCurve& hurst, const EstimatorParams& params,
                        const AsymVarConfig& cfg) {
  if (hurst.u.size() < 2)
    throw std::invalid_argument("variance_curve: need a Hurst curve on the {t/n} grid");
  const double du = hurst.u[1] - hurst.u[0];
  const int n = int(std::llround(1.0 / du));
  const int L = params.lag_for(n);
  if (hurst.u.size() != n - 2 * L + 1 ||
      std::abs(hurst.u[0] - double(2 * L) / n) > 1e-9)
    throw std::invalid_argument(
        "variance_curve: Hurst curve must be sampled at t/n for t = 2L..n");

  VarCurve vc;
  vc.n = n;
  vc.start = 2 * L;
  vc.u = Eigen::VectorXd::LinSpaced(n + 1, 0.0, 1.0);
  vc.value = Eigen::VectorXd::Zero(n + 1);
  double cum = 0.0;
  for (int t = 2 * L; t <= n; ++t) {
    cum += lrv_eval(hurst.value[t - 2 * L], cfg);
    vc.value[t] = cum / n;
  }
  return vc;
}

}  // namespace mbm
