#include "mbm/simulate.hpp"

#include <unsupported/Eigen/FFT>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mbm/fracmath.hpp"
#include "mbm/rng.hpp"

namespace mbm {

namespace {

using CVec = std::vector<std::complex<double>>;

// ---------------------------------------------------------------------------
// exact fGn via circulant embedding
// ---------------------------------------------------------------------------

// autocovariance of fBm increments at step 1/n: (sigma^2/2) n^{-2H} gamma_H(k)
Eigen::VectorXd fgn_autocov(double hurst, double sigma, int n, int count) {
  Eigen::VectorXd r(count);
  const double scale = 0.5 * sigma * sigma * std::pow(double(n), -2.0 * hurst);
  for (int k = 0; k < count; ++k) r[k] = scale * gamma_small(hurst, double(k));
  return r;
}

Eigen::VectorXd fgn_circulant(double hurst, double sigma, int n, int len,
                              std::mt19937_64& eng) {
  const int two_n = 2 * len;
  const Eigen::VectorXd r = fgn_autocov(hurst, sigma, n, len + 1);
  CVec circ(two_n);
  for (int k = 0; k <= len; ++k) circ[k] = r[k];
  for (int k = 1; k < len; ++k) circ[two_n - k] = r[k];

  Eigen::FFT<double> fft;
  CVec lambda;
  fft.fwd(lambda, circ);
  double min_l = 0.0, max_l = 0.0;
  for (auto& l : lambda) {
    min_l = std::min(min_l, l.real());
    max_l = std::max(max_l, l.real());
  }
  if (min_l < -1e-9 * max_l) return {};  // embedding not nonnegative definite

  std::normal_distribution<double> gauss;
  CVec g(two_n);
  const double inv = 1.0 / double(two_n);
  g[0] = std::sqrt(std::max(0.0, lambda[0].real()) * inv) * gauss(eng);
  for (int k = 1; k < len; ++k) {
    const double a = gauss(eng), b = gauss(eng);
    const double s = std::sqrt(std::max(0.0, lambda[k].real()) * inv * 0.5);
    g[k] = {s * a, s * b};
    g[two_n - k] = std::conj(g[k]);
  }
  g[len] = std::sqrt(std::max(0.0, lambda[len].real()) * inv) * gauss(eng);

  CVec out;
  fft.fwd(out, g);
  Eigen::VectorXd e(len);
  for (int k = 0; k < len; ++k) e[k] = out[k].real();
  return e;
}

Eigen::VectorXd fgn_cholesky(double hurst, double sigma, int n, int len,
                             std::mt19937_64& eng) {
  if (len > 8192)
    throw std::runtime_error("fBm synthesis failed: embedding not nonnegative definite "
                             "and series too long for dense Cholesky");
  const Eigen::VectorXd r = fgn_autocov(hurst, sigma, n, len);
  Eigen::MatrixXd cov(len, len);
  for (int i = 0; i < len; ++i)
    for (int j = 0; j < len; ++j) cov(i, j) = r[std::abs(i - j)];
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fBm synthesis failed: covariance not positive definite");
  std::normal_distribution<double> gauss;
  Eigen::VectorXd z(len);
  for (int i = 0; i < len; ++i) z[i] = gauss(eng);
  return llt.matrixL() * z;
}

}  // namespace

SamplePath simulate_fbm(const FbmConfig& cfg) {
  if (!(cfg.hurst > 0.0 && cfg.hurst < 1.0))
    throw std::invalid_argument("FbmConfig: hurst must lie in (0,1)");
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("FbmConfig: sigma must be > 0");
  if (cfg.n < 8) throw std::invalid_argument("FbmConfig: n must be >= 8");
  if (cfg.lead_in < 0) throw std::invalid_argument("FbmConfig: lead_in must be >= 0");

  const int len = cfg.n + cfg.lead_in;
  auto eng = rng::make_engine(cfg.seed);
  Eigen::VectorXd inc = fgn_circulant(cfg.hurst, cfg.sigma, cfg.n, len, eng);
  if (inc.size() == 0) {
    eng = rng::make_engine(cfg.seed);
    inc = fgn_cholesky(cfg.hurst, cfg.sigma, cfg.n, len, eng);
  }

  SamplePath path;
  path.grid = ObservationGrid{cfg.n, cfg.lead_in};
  path.values.resize(path.grid.points());
  path.values[0] = 0.0;
  for (int j = 1; j < path.grid.points(); ++j)
    path.values[j] = path.values[j - 1] + inc[j - 1];
  path.values.array() -= path.values[path.grid.index_of_zero()];
  return path;
}

// ---------------------------------------------------------------------------
// shared-mesh mBm
// ---------------------------------------------------------------------------

namespace {

// Cached FFT of the lag kernel F_p(m) = m^p - (m-1)^p, padded to size S.
class KernelFftCache {
 public:
  std::shared_ptr<const CVec> get(double p, long nc, int s,
                                  const Eigen::VectorXd& log_tab) {
    std::uint64_t bits;
    std::memcpy(&bits, &p, sizeof bits);
    const Key key{bits, nc, s};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    Eigen::VectorXd f(s);
    f.setZero();
    f.segment(1, nc) = (p * log_tab.segment(1, nc)).array().exp() -
                       (p * log_tab.segment(0, nc)).array().exp();
    CVec in(s);
    for (int i = 0; i < s; ++i) in[i] = f[i];
    auto out = std::make_shared<CVec>();
    Eigen::FFT<double> fft;
    fft.fwd(*out, in);
    std::lock_guard<std::mutex> lock(mu_);
    if (map_.size() > 16) map_.clear();
    return map_.emplace(key, std::move(out)).first->second;
  }

 private:
  using Key = std::tuple<std::uint64_t, long, int>;
  std::mutex mu_;
  std::map<Key, std::shared_ptr<const CVec>> map_;
};

KernelFftCache g_kernel_cache;

struct Mesh {
  long nc = 0;       // number of cells; cell j = [s_j, s_{j+1}]
  double delta = 0;  // cell width 1/(n*submesh)
  int submesh = 1;
  Eigen::VectorXd log_tab;  // log_tab[m] = ln(m), m = 0..nc (ln 0 ~ -inf)

  double cell_mid(long j) const { return 1.0 - (double(nc - j) - 0.5) * delta; }
  // mesh node of observation time (i - lead_in)/n, i = 0..n+lead_in
  long node(int n, int lead_in, int i) const {
    return nc - long(submesh) * long(n + lead_in - i);
  }
};

Mesh build_mesh(int n, int submesh, double horizon) {
  Mesh mesh;
  mesh.submesh = submesh;
  mesh.delta = 1.0 / (double(n) * submesh);
  mesh.nc = long(n) * submesh + long(std::ceil(horizon * n * submesh));
  mesh.log_tab.resize(mesh.nc + 1);
  mesh.log_tab[0] = -1e30;
  for (long m = 1; m <= mesh.nc; ++m) mesh.log_tab[m] = std::log(double(m));
  return mesh;
}

int fft_size_for(long nc) {
  int s = 1;
  while (s < 2 * nc + 2) s *= 2;
  return s;
}

// A(node k) = sum_{m=1..k} w[k-m] * (m^{p[k-m]} - (m-1)^{p[k-m]}) for each
// requested node, evaluated with reversed arrays so all accesses are
// contiguous. w carries dB * sigma * delta^{p-1} / p per cell.
void direct_eval(const Mesh& mesh, const Eigen::VectorXd& w, const Eigen::VectorXd& p,
                 const std::vector<long>& nodes, Eigen::VectorXd& out) {
  const long nc = mesh.nc;
  Eigen::VectorXd w_rev = w.reverse();
  Eigen::VectorXd p_rev = p.reverse();
  const auto& lt = mesh.log_tab;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0; idx < std::ptrdiff_t(nodes.size()); ++idx) {
    const long k = nodes[idx];
    if (k <= 0) {
      out[idx] = 0.0;
      continue;
    }
    const long off = nc - 1 - k;
    const auto wseg = w_rev.segment(off + 1, k).array();
    const auto pseg = p_rev.segment(off + 1, k).array();
    out[idx] = (wseg * ((pseg * lt.segment(1, k).array()).exp() -
                        (pseg * lt.segment(0, k).array()).exp()))
                   .sum();
  }
}

// same sum restricted to an explicit (sorted) subset of cells
void subset_eval(const Mesh& mesh, const std::vector<long>& cells,
                 const Eigen::VectorXd& w, const Eigen::VectorXd& p,
                 const std::vector<long>& nodes, Eigen::VectorXd& out) {
  if (cells.empty()) {
    for (size_t i = 0; i < nodes.size(); ++i) out[i] = 0.0;
    return;
  }
  const auto& lt = mesh.log_tab;
  Eigen::VectorXd wc(cells.size()), pc(cells.size());
  for (size_t i = 0; i < cells.size(); ++i) {
    wc[i] = w[cells[i]];
    pc[i] = p[cells[i]];
  }
#pragma omp parallel
  {
    Eigen::VectorXd l1(cells.size()), l0(cells.size());
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t idx = 0; idx < std::ptrdiff_t(nodes.size()); ++idx) {
      const long k = nodes[idx];
      const auto cut = std::lower_bound(cells.begin(), cells.end(), k) - cells.begin();
      if (cut == 0) {
        out[idx] = 0.0;
        continue;
      }
      for (long i = 0; i < cut; ++i) {
        const long m = k - cells[i];
        l1[i] = lt[m];
        l0[i] = lt[m - 1];
      }
      const auto ph = pc.head(cut).array();
      out[idx] = (wc.head(cut).array() *
                  ((ph * l1.head(cut).array()).exp() - (ph * l0.head(cut).array()).exp()))
                     .sum();
    }
  }
}

struct ExponentClass {
  double p = 0;
  std::vector<long> cells;
};

// A at the requested nodes via one linear convolution per exponent class.
void fft_eval(const Mesh& mesh, const Eigen::VectorXd& w,
              const std::vector<ExponentClass>& classes, const std::vector<long>& nodes,
              Eigen::VectorXd& out) {
  const int s = fft_size_for(mesh.nc);
  Eigen::FFT<double> fft;
  CVec spectrum(s, {0.0, 0.0}), wfreq, wtime(s);
  for (const auto& cls : classes) {
    auto kernel = g_kernel_cache.get(cls.p, mesh.nc, s, mesh.log_tab);
    std::fill(wtime.begin(), wtime.end(), std::complex<double>{0.0, 0.0});
    for (long j : cls.cells) wtime[j] = w[j];
    fft.fwd(wfreq, wtime);
    for (int i = 0; i < s; ++i) spectrum[i] += wfreq[i] * (*kernel)[i];
  }
  CVec conv;
  fft.inv(conv, spectrum);
  for (size_t i = 0; i < nodes.size(); ++i)
    out[i] = nodes[i] > 0 ? conv[nodes[i]].real() : 0.0;
}

double horizon_tail_ratio(const ThetaFunction& theta, double horizon) {
  // truncated integrand beyond -M, bounded via the mean value theorem
  const double h = theta.h_hi();
  const double a = std::abs(h - 0.5);
  const double tail_var =
      theta.sigma2_hi() * a * a * std::pow(horizon, 2.0 * h - 2.0) / (2.0 - 2.0 * h);
  return std::sqrt(tail_var / theta.sigma2_lo());
}

}  // namespace

SamplePath simulate_mbm(const MbmConfig& cfg, MbmDiagnostics* diag) {
  if (cfg.n < 8) throw std::invalid_argument("MbmConfig: n must be >= 8");
  if (cfg.lead_in < 0 || cfg.lead_in > cfg.n)
    throw std::invalid_argument("MbmConfig: lead_in must lie in [0, n]");
  if (!(cfg.past_horizon >= 1.0))
    throw std::invalid_argument("MbmConfig: past_horizon must be >= 1");
  if (cfg.submesh < 1) throw std::invalid_argument("MbmConfig: submesh must be >= 1");

  const Mesh mesh = build_mesh(cfg.n, cfg.submesh, cfg.past_horizon);
  const long nc = mesh.nc;

  auto eng = rng::make_engine(cfg.seed);
  std::normal_distribution<double> gauss;
  const double sqrt_delta = std::sqrt(mesh.delta);
  Eigen::VectorXd db(nc);
  for (long j = 0; j < nc; ++j) db[j] = sqrt_delta * gauss(eng);

  const int obs = cfg.n + cfg.lead_in + 1;
  std::vector<long> nodes(obs);
  for (int i = 0; i < obs; ++i) nodes[i] = mesh.node(cfg.n, cfg.lead_in, i);

  MbmDiagnostics local;
  local.horizon_tail_ratio = horizon_tail_ratio(cfg.theta, cfg.past_horizon);
  local.horizon_warning = local.horizon_tail_ratio > 0.05;

  SamplePath path;
  path.grid = ObservationGrid{cfg.n, cfg.lead_in};
  path.values.resize(obs);

  const bool classical_varying =
      cfg.variant == MbmVariant::classical && !cfg.theta.constant_hurst();

  if (!classical_varying) {
    // theta frozen at cell midpoints; for constant Hurst the classical and
    // Ito definitions coincide, so both run through this branch
    Eigen::VectorXd p(nc), w(nc);
    for (long j = 0; j < nc; ++j) {
      const double v = mesh.cell_mid(j);
      const double pj = cfg.theta.hurst(v) + 0.5;
      p[j] = pj;
      w[j] = db[j] * cfg.theta.sigma(v) * std::pow(mesh.delta, pj - 1.0) / pj;
    }

    // group cells by exact frozen Hurst value
    std::map<double, std::vector<long>> groups;
    for (long j = 0; j < nc; ++j) groups[p[j]].push_back(j);
    local.exponent_classes = int(groups.size());

    std::vector<const std::pair<const double, std::vector<long>>*> sorted;
    for (auto& g : groups) sorted.push_back(&g);
    std::sort(sorted.begin(), sorted.end(),
              [](auto* a, auto* b) { return a->second.size() > b->second.size(); });

    std::vector<ExponentClass> big;
    long covered = 0;
    const long min_class = std::max<long>(1024, nc / 64);
    for (auto* g : sorted) {
      if (int(big.size()) >= 8 || long(g->second.size()) < min_class) break;
      big.push_back({g->first, g->second});
      covered += long(g->second.size());
    }

    Eigen::VectorXd a_vals(obs);
    if (covered >= nc / 2 && !big.empty()) {
      local.fft_path = true;
      fft_eval(mesh, w, big, nodes, a_vals);
      std::vector<char> in_big(nc, 0);
      for (const auto& cls : big)
        for (long j : cls.cells) in_big[j] = 1;
      std::vector<long> leftover;
      for (long j = 0; j < nc; ++j)
        if (!in_big[j]) leftover.push_back(j);
      if (!leftover.empty()) {
        Eigen::VectorXd extra(obs);
        subset_eval(mesh, leftover, w, p, nodes, extra);
        a_vals += extra;
      }
    } else {
      direct_eval(mesh, w, p, nodes, a_vals);
    }
    path.values = a_vals.array() - a_vals[path.grid.index_of_zero()];
  } else {
    // classical variant: the Hurst exponent is frozen at the observation time
    // in both kernel pieces, so each time gets its own exponent
    Eigen::VectorXd sdb(nc);
    for (long j = 0; j < nc; ++j) sdb[j] = db[j] * cfg.theta.sigma(mesh.cell_mid(j));
    Eigen::VectorXd sdb_rev = sdb.reverse();
    const long k_zero = nodes[path.grid.index_of_zero()];
    const auto& lt = mesh.log_tab;
#pragma omp parallel
    {
      Eigen::VectorXd ex(nc + 1);
#pragma omp for schedule(dynamic)
      for (int i = 0; i < obs; ++i) {
        const double t = path.grid.time(i);
        const double pt = cfg.theta.hurst(t) + 0.5;
        const double scale = std::pow(mesh.delta, pt - 1.0) / pt;
        const long k_hi = std::max(nodes[i], k_zero);
        ex.head(k_hi + 1) = (pt * lt.head(k_hi + 1).array()).exp();
        auto partial = [&](long k) {
          if (k <= 0) return 0.0;
          const long off = nc - 1 - k;
          return (sdb_rev.segment(off + 1, k).array() *
                  (ex.segment(1, k).array() - ex.segment(0, k).array()))
                     .sum() *
                 scale;
        };
        // the two inlined partial() expansions may contract differently under
        // FMA; pin the anchor X_0 = 0 structurally
        path.values[i] =
            nodes[i] == k_zero ? 0.0 : partial(nodes[i]) - partial(k_zero);
      }
    }
    std::map<double, int> distinct;
    for (int i = 0; i < obs; ++i) distinct[cfg.theta.hurst(path.grid.time(i))] = 1;
    local.exponent_classes = int(distinct.size());
  }

  if (diag) *diag = local;
  return path;
}

Eigen::VectorXd simulate_time_changed_bm(const Eigen::VectorXd& variance_clock,
                                         std::uint64_t seed) {
  const Eigen::Index k = variance_clock.size();
  if (k == 0) return {};
  if (variance_clock[0] < 0)
    throw std::invalid_argument("variance clock must start >= 0");
  for (Eigen::Index i = 1; i < k; ++i)
    if (variance_clock[i] < variance_clock[i - 1])
      throw std::invalid_argument("variance clock must be nondecreasing (violated at index " +
                                  std::to_string(i) + ")");

  auto eng = rng::make_engine(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd w(k);
  double prev = 0.0, level = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double dv = variance_clock[i] - prev;
    if (dv > 0) level += std::sqrt(dv) * gauss(eng);
    prev = variance_clock[i];
    w[i] = level;
  }
  return w;
}

}  // namespace mbm
