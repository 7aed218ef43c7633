#include "mbm/hypotests.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mbm/rng.hpp"
#include "mbm/simulate.hpp"

namespace mbm {

FunctionClass FunctionClass::singleton(Eigen::VectorXd h_samples) {
  if (h_samples.size() < 2 || h_samples.minCoeff() <= 0.0 || h_samples.maxCoeff() >= 1.0)
    throw std::invalid_argument("singleton class needs >= 2 samples inside (0,1)");
  FunctionClass c;
  c.kind = FunctionClassKind::singleton;
  c.singleton_h = std::move(h_samples);
  return c;
}

FunctionClass FunctionClass::constants(double lo, double hi) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi))
    throw std::invalid_argument("constant family range must satisfy 0 <= lo < hi <= 1");
  FunctionClass c;
  c.kind = FunctionClassKind::constant_family;
  c.c_lo = lo;
  c.c_hi = hi;
  return c;
}

FunctionClass FunctionClass::linear() {
  FunctionClass c;
  c.kind = FunctionClassKind::linear_family;
  return c;
}

FunctionClass FunctionClass::sampled(std::vector<Eigen::VectorXd> curves) {
  if (curves.empty()) throw std::invalid_argument("sampled class must be nonempty");
  for (const auto& h : curves)
    if (h.size() < 2 || h.minCoeff() <= 0.0 || h.maxCoeff() >= 1.0)
      throw std::invalid_argument("sampled class member must map [0,1] into (0,1)");
  FunctionClass c;
  c.kind = FunctionClassKind::sampled_grid;
  c.candidates = std::move(curves);
  return c;
}

namespace {

// sup grid: curve indices coarsened to at most 1024 points, always ending at n
std::vector<int> sup_indices(int n) {
  const int stride = std::max(1, n / 1024);
  std::vector<int> ks;
  for (int k = 0; k <= n; k += stride) ks.push_back(k);
  if (ks.back() != n) ks.push_back(n);
  return ks;
}

// exact antiderivative of the piecewise-linear interpolant of h_samples
double sampled_antiderivative(const Eigen::VectorXd& h, double u) {
  const Eigen::Index m = h.size();
  const double step = 1.0 / double(m - 1);
  u = std::min(1.0, std::max(0.0, u));
  const double pos = u * double(m - 1);
  Eigen::Index s = Eigen::Index(pos);
  if (s > m - 2) s = m - 2;
  double integral = 0.0;
  for (Eigen::Index i = 0; i < s; ++i) integral += 0.5 * step * (h[i] + h[i + 1]);
  const double xi = pos - double(s);
  integral += step * (h[s] * xi + 0.5 * (h[s + 1] - h[s]) * xi * xi);
  return integral;
}

double golden_section(double lo, double hi, const std::function<double(double)>& f,
                      double tol, double& argmin) {
  const double gr = 0.61803398874989484820;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  argmin = 0.5 * (a + b);
  return f(argmin);
}

Eigen::VectorXd mc_sup_sample(const VarCurve& vc, bool bridge, const McSettings& mc) {
  if (mc.reps < 1000)
    throw std::invalid_argument("Monte-Carlo quantiles need reps >= 1000");
  if (mc.grid < 2) throw std::invalid_argument("Monte-Carlo grid must have >= 2 points");
  const int g = mc.grid;
  Eigen::VectorXd clock(g);
  for (int k = 0; k < g; ++k) clock[k] = vc.at(double(k + 1) / g);
  for (int k = 1; k < g; ++k)
    if (clock[k] < clock[k - 1])
      throw std::invalid_argument("variance curve must be nondecreasing");
  if (!(clock[g - 1] > 0.0))
    throw std::runtime_error("degenerate variance: S(1) = 0, test undefined");

  Eigen::VectorXd sups(mc.reps);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < mc.reps; ++r) {
    const Eigen::VectorXd w =
        simulate_time_changed_bm(clock, rng::derive(mc.seed, 0x6d632d737570ULL, r));
    double s = 0.0;
    const double w1 = w[g - 1];
    for (int k = 0; k < g; ++k) {
      const double x = bridge ? w[k] - (double(k + 1) / g) * w1 : w[k];
      s = std::max(s, std::abs(x));
    }
    sups[r] = s;
  }
  return sups;
}

double empirical_quantile(Eigen::VectorXd sample, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0,1)");
  std::sort(sample.begin(), sample.end());
  const int k = std::max<int>(
      1, std::min<int>(int(sample.size()),
                       int(std::ceil((1.0 - alpha) * double(sample.size())))));
  return sample[k - 1];
}

// tests need a one-sided fit; swap a two-sided kernel for its left-supported
// counterpart of the same shape
EstimatorParams with_left_kernel(const EstimatorParams& params) {
  if (params.kernel.support() == KernelSupport::left) return params;
  if (params.kernel.shape() == KernelShape::custom_sampled)
    throw std::invalid_argument(
        "tests require a left-supported kernel; pass one explicitly for custom shapes");
  EstimatorParams p = params;
  p.kernel = Kernel(params.kernel.shape(), KernelSupport::left);
  return p;
}

}  // namespace

double cusum_statistic(const IntegratedCurve& curve) {
  if (curve.n <= 0 || curve.value.size() != curve.n + 1)
    throw std::invalid_argument("cusum_statistic: curve must span u in [0,1]");
  const double last = curve.value[curve.n];
  double stat = 0.0;
  for (int k : sup_indices(curve.n))
    stat = std::max(stat, std::abs(curve.value[k] - curve.u[k] * last));
  return stat;
}

double mc_quantile_cusum(const VarCurve& var_curve, double alpha, const McSettings& mc) {
  return empirical_quantile(mc_sup_sample(var_curve, true, mc), alpha);
}

double mc_quantile_gof(const VarCurve& var_curve, double alpha, const McSettings& mc) {
  return empirical_quantile(mc_sup_sample(var_curve, false, mc), alpha);
}

std::pair<double, Eigen::Vector2d> gof_statistic(const IntegratedCurve& curve,
                                                 const FunctionClass& cls) {
  if (curve.n <= 0 || curve.value.size() != curve.n + 1)
    throw std::invalid_argument("gof_statistic: curve must span u in [0,1]");
  const std::vector<int> ks = sup_indices(curve.n);

  switch (cls.kind) {
    case FunctionClassKind::singleton: {
      double sup = 0.0;
      for (int k : ks)
        sup = std::max(sup, std::abs(curve.value[k] -
                                     sampled_antiderivative(cls.singleton_h, curve.u[k])));
      return {sup, Eigen::Vector2d::Zero()};
    }
    case FunctionClassKind::constant_family: {
      auto f = [&](double c) {
        double sup = 0.0;
        for (int k : ks) sup = std::max(sup, std::abs(curve.value[k] - c * curve.u[k]));
        return sup;
      };
      double c_min = 0.0;
      const double val = golden_section(cls.c_lo, cls.c_hi, f, 1e-10, c_min);
      return {val, Eigen::Vector2d(c_min, 0.0)};
    }
    case FunctionClassKind::linear_family: {
      // parameters (b, c) = (H(0), H(1)); integral curve a u^2/2 + b u with a = c - b
      auto f = [&](double b, double c) {
        const double a = c - b;
        double sup = 0.0;
        for (int k : ks) {
          const double u = curve.u[k];
          sup = std::max(sup, std::abs(curve.value[k] - 0.5 * a * u * u - b * u));
        }
        return sup;
      };
      const int coarse = 64;
      double best = std::numeric_limits<double>::infinity();
      double bb = 0.5, bc = 0.5;
      double step = 1.0 / (coarse - 1);
      for (int i = 0; i < coarse; ++i)
        for (int j = 0; j < coarse; ++j) {
          const double v = f(i * step, j * step);
          if (v < best) {
            best = v;
            bb = i * step;
            bc = j * step;
          }
        }
      for (int refine = 0; refine < 2; ++refine) {
        const double half = 2.0 * step;
        step /= 4.0;
        const double lo_b = std::max(0.0, bb - half), hi_b = std::min(1.0, bb + half);
        const double lo_c = std::max(0.0, bc - half), hi_c = std::min(1.0, bc + half);
        for (double b = lo_b; b <= hi_b + 1e-12; b += step)
          for (double c = lo_c; c <= hi_c + 1e-12; c += step) {
            const double v = f(b, c);
            if (v < best) {
              best = v;
              bb = b;
              bc = c;
            }
          }
      }
      return {best, Eigen::Vector2d(bc - bb, bb)};  // (a, b)
    }
    case FunctionClassKind::sampled_grid: {
      double best = std::numeric_limits<double>::infinity();
      int best_idx = 0;
      for (size_t i = 0; i < cls.candidates.size(); ++i) {
        double sup = 0.0;
        for (int k : ks)
          sup = std::max(sup, std::abs(curve.value[k] - sampled_antiderivative(
                                                            cls.candidates[i], curve.u[k])));
        if (sup < best) {
          best = sup;
          best_idx = int(i);
        }
      }
      return {best, Eigen::Vector2d(double(best_idx), 0.0)};
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

TestReport run_test(const SamplePath& path, const EstimatorParams& params0,
                    const FunctionClass* cls, double alpha, const McSettings& mc) {
  const EstimatorParams params = with_left_kernel(params0);
  const IncrementPair inc = increments(path);
  const IntegratedPipeline pipe = integrated_pipeline(inc, params);
  const double root_n = std::sqrt(double(inc.n));

  TestReport rep;
  rep.test_name = cls ? "gof" : "constancy";
  rep.alpha = alpha;
  rep.mc_reps = mc.reps;
  rep.n = inc.n;
  rep.bandwidth = pipe.diag.bandwidth_used;
  rep.lag = pipe.diag.lag_used;
  rep.clip_count = pipe.diag.clip_count;

  if (cls) {
    auto [stat, argmin] = gof_statistic(pipe.curve, *cls);
    rep.statistic = root_n * stat;
    rep.minimizer_a = argmin[0];
    rep.minimizer_b = argmin[1];
  } else {
    rep.statistic = root_n * cusum_statistic(pipe.curve);
  }

  const Eigen::VectorXd sups = mc_sup_sample(pipe.varcurve, cls == nullptr, mc);
  rep.quantile = empirical_quantile(sups, alpha);
  const int exceed = int((sups.array() >= rep.statistic).count());
  rep.p_value = double(1 + exceed) / double(mc.reps + 1);
  rep.reject = rep.statistic > rep.quantile;
  return rep;
}

}  // namespace

TestReport test_constancy(const SamplePath& path, const EstimatorParams& params,
                          double alpha, const McSettings& mc) {
  return run_test(path, params, nullptr, alpha, mc);
}

TestReport test_gof(const SamplePath& path, const EstimatorParams& params,
                    const FunctionClass& cls, double alpha, const McSettings& mc) {
  return run_test(path, params, &cls, alpha, mc);
}

std::string TestReport::summary() const {
  std::ostringstream os;
  os << test_name << ": statistic=" << statistic << " quantile(alpha=" << alpha
     << ")=" << quantile << " p=" << p_value << " -> "
     << (reject ? "reject" : "retain");
  return os.str();
}

std::string to_json(const TestReport& r) {
  nlohmann::json j{{"test", r.test_name},
                   {"statistic", r.statistic},
                   {"quantile", r.quantile},
                   {"alpha", r.alpha},
                   {"p_value", r.p_value},
                   {"decision", r.reject ? "reject" : "retain"},
                   {"mc_reps", r.mc_reps},
                   {"n", r.n},
                   {"bandwidth", r.bandwidth},
                   {"lag", r.lag},
                   {"clip_count", r.clip_count},
                   {"minimizer", {r.minimizer_a, r.minimizer_b}}};
  return j.dump(2);
}

}  // namespace mbm
