#include "mbm/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mbm/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mbm {

std::string ExperimentConfig::scenario_name() const {
  std::string base;
  switch (scenario) {
    case Scenario::constant_h: base = "constant_h"; break;
    case Scenario::smooth_h: base = "smooth_h"; break;
    case Scenario::jump_h: base = "jump_h"; break;
    case Scenario::custom: base = "custom"; break;
  }
  if (sigma_profile == SigmaProfile::sinusoidal) base += "+sin_sigma";
  return base;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.replications < 1)
    throw std::invalid_argument("replications must be >= 1");
  if (cfg.n_list.empty()) throw std::invalid_argument("n_list must be nonempty");
  for (int n : cfg.n_list)
    if (n < 256) throw std::invalid_argument("every n must be >= 256, got " + std::to_string(n));
  if (!(cfg.alpha > 0 && cfg.alpha < 1))
    throw std::invalid_argument("alpha must lie in (0,1)");
  if (cfg.scenario == Scenario::custom && cfg.theta_file.empty())
    throw std::invalid_argument("custom scenario needs a theta file");
}

namespace {

Eigen::VectorXd sigma_samples(const ExperimentConfig& cfg, int count) {
  Eigen::VectorXd s(count);
  for (int i = 0; i < count; ++i) {
    const double v = double(i) / (count - 1);
    s[i] = cfg.sigma_profile == SigmaProfile::sinusoidal
               ? 1.0 + 0.5 * std::sin(2.0 * M_PI * v)
               : 1.0;
  }
  return s;
}

}  // namespace

ThetaFunction scenario_theta(const ExperimentConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::constant_h: {
      const int m = 257;
      return ThetaFunction(Eigen::VectorXd::Constant(m, cfg.h0), sigma_samples(cfg, m),
                           cfg.eta);
    }
    case Scenario::smooth_h: {
      const int m = 257;
      Eigen::VectorXd h(m);
      for (int i = 0; i < m; ++i)
        h[i] = cfg.smooth_lo + (cfg.smooth_hi - cfg.smooth_lo) * double(i) / (m - 1);
      return ThetaFunction(h, sigma_samples(cfg, m), cfg.eta);
    }
    case Scenario::jump_h: {
      const int m = 513;
      Eigen::VectorXd h(m);
      for (int i = 0; i < m; ++i)
        h[i] = (double(i) / (m - 1) < cfg.jump_at) ? cfg.jump_lo : cfg.jump_hi;
      return ThetaFunction(h, sigma_samples(cfg, m), cfg.eta);
    }
    case Scenario::custom:
      return read_theta_csv(cfg.theta_file, cfg.eta);
  }
  throw std::logic_error("unreachable");
}

std::uint64_t replication_seed(const ExperimentConfig& cfg, int n, int rep) {
  return rng::derive(cfg.seed, rng::hash64(cfg.scenario_name()), std::uint64_t(n),
                     std::uint64_t(rep));
}

SamplePath simulate_scenario(const ExperimentConfig& cfg, int n, std::uint64_t rep_seed) {
  const bool plain_fbm = cfg.scenario == Scenario::constant_h &&
                         cfg.sigma_profile == SigmaProfile::constant;
  if (plain_fbm)
    return simulate_fbm({cfg.h0, 1.0, n, 3, rep_seed});
  MbmConfig mc{scenario_theta(cfg), n, 3, cfg.past_horizon, cfg.submesh,
               MbmVariant::ito, rep_seed};
  return simulate_mbm(mc);
}

namespace {

double true_hurst_at(const ExperimentConfig& cfg, double u) {
  if (cfg.scenario == Scenario::constant_h) return cfg.h0;
  return scenario_theta(cfg).hurst(u);
}

template <typename Fn>
void parallel_tasks(int tasks, int threads, Fn&& fn) {
#ifdef _OPENMP
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (int t = 0; t < tasks; ++t) fn(t);
#else
  (void)threads;
  for (int t = 0; t < tasks; ++t) fn(t);
#endif
}

void write_manifest(const ExperimentConfig& cfg, const ResultTable& table,
                    const std::string& kind, double wall_seconds) {
  namespace fs = std::filesystem;
  nlohmann::json j;
  j["kind"] = kind;
  j["version"] = "0.1.0";
  j["wall_seconds"] = wall_seconds;
  j["config"] = {{"scenario", cfg.scenario_name()},
                 {"h0", cfg.h0},
                 {"eta", cfg.eta},
                 {"n_list", cfg.n_list},
                 {"replications", cfg.replications},
                 {"alpha", cfg.alpha},
                 {"seed", cfg.seed},
                 {"bandwidth", cfg.params.bandwidth},
                 {"bandwidth_const", cfg.params.bandwidth_const},
                 {"degree", cfg.params.degree},
                 {"lag", cfg.params.lag},
                 {"mc_reps", cfg.mc.reps},
                 {"mc_grid", cfg.mc.grid},
                 {"past_horizon", cfg.past_horizon},
                 {"submesh", cfg.submesh},
                 {"threads", cfg.threads}};
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& r : table.rows)
    if (!r.ok)
      failures.push_back({{"scenario", r.scenario},
                          {"n", r.n},
                          {"rep", r.rep},
                          {"seed", r.seed},
                          {"error", r.error}});
  j["failures"] = failures;
  std::ofstream(fs::path(cfg.output_dir) / "manifest.json") << j.dump(2) << "\n";
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void persist_rate(const ExperimentConfig& cfg, const ResultTable& table,
                  double wall_seconds) {
  if (cfg.output_dir.empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  {
    std::ofstream out(fs::path(cfg.output_dir) / "rate_results.csv");
    out << "scenario,n,rep,seed,status,dagger_025,dagger_05,dagger_075,"
           "logratio_025,logratio_05,logratio_075\n";
    for (const auto& r : table.rows) {
      out << r.scenario << ',' << r.n << ',' << r.rep << ',' << r.seed << ','
          << (r.ok ? "ok" : "error");
      for (double v : r.est_dagger) out << ',' << fmt(v);
      for (double v : r.est_logratio) out << ',' << fmt(v);
      out << '\n';
    }
  }
  {
    std::ofstream out(fs::path(cfg.output_dir) / "rate_summary.csv");
    out << "n,probe,rmse_dagger,rmse_logratio\n";
    for (const auto& a : table.rate_aggs)
      out << a.n << ',' << fmt(a.probe) << ',' << fmt(a.rmse_dagger) << ','
          << fmt(a.rmse_logratio) << '\n';
    out << "# slope_dagger_05," << fmt(table.slope_dagger) << '\n';
  }
  write_manifest(cfg, table, "rate", wall_seconds);
}

void persist_test(const ExperimentConfig& cfg, const ResultTable& table,
                  double wall_seconds) {
  if (cfg.output_dir.empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  {
    std::ofstream out(fs::path(cfg.output_dir) / "test_results.csv");
    out << "scenario,n,rep,seed,status,statistic,quantile,p_value,reject\n";
    for (const auto& r : table.rows) {
      out << r.scenario << ',' << r.n << ',' << r.rep << ',' << r.seed << ','
          << (r.ok ? "ok" : "error") << ',' << fmt(r.statistic) << ','
          << fmt(r.quantile) << ',' << fmt(r.p_value) << ',' << (r.reject ? 1 : 0)
          << '\n';
    }
  }
  {
    std::ofstream out(fs::path(cfg.output_dir) / "test_summary.csv");
    out << "scenario,n,reject_rate,binomial_se,failures\n";
    for (const auto& a : table.test_aggs)
      out << a.scenario << ',' << a.n << ',' << fmt(a.reject_rate) << ',' << fmt(a.se)
          << ',' << a.failures << '\n';
  }
  write_manifest(cfg, table, "test", wall_seconds);
}

}  // namespace

ResultTable run_rate_study(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const int reps = cfg.replications;
  const int tasks = int(cfg.n_list.size()) * reps;

  ResultTable table;
  table.rows.resize(tasks);
  parallel_tasks(tasks, cfg.threads, [&](int t) {
    const int n = cfg.n_list[t / reps];
    const int rep = t % reps;
    ResultRow& row = table.rows[t];
    row.scenario = cfg.scenario_name();
    row.n = n;
    row.rep = rep;
    row.seed = replication_seed(cfg, n, rep);
    try {
      const SamplePath path = simulate_scenario(cfg, n, row.seed);
      const IncrementPair inc = increments(path);
      Eigen::VectorXd grid(3);
      for (int p = 0; p < 3; ++p) grid[p] = kProbes[p];
      const HurstCurve dag = hurst_smoothed_log(inc, cfg.params, grid);
      const HurstCurve lr = hurst_log_ratio(inc, cfg.params, grid);
      for (int p = 0; p < 3; ++p) {
        row.est_dagger[p] = dag.value[p];
        row.est_logratio[p] = lr.value[p];
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });

  for (int n : cfg.n_list) {
    for (int p = 0; p < 3; ++p) {
      const double truth = true_hurst_at(cfg, kProbes[p]);
      double sd = 0, sl = 0;
      int count = 0;
      for (const auto& r : table.rows) {
        if (r.n != n || !r.ok) continue;
        sd += (r.est_dagger[p] - truth) * (r.est_dagger[p] - truth);
        sl += (r.est_logratio[p] - truth) * (r.est_logratio[p] - truth);
        ++count;
      }
      ResultTable::RateAgg agg;
      agg.n = n;
      agg.probe = kProbes[p];
      agg.rmse_dagger = count ? std::sqrt(sd / count) : 0.0;
      agg.rmse_logratio = count ? std::sqrt(sl / count) : 0.0;
      table.rate_aggs.push_back(agg);
    }
  }

  // OLS slope of log RMSE(dagger, probe 0.5) against log n
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& a : table.rate_aggs) {
    if (a.probe != 0.5 || a.rmse_dagger <= 0) continue;
    const double x = std::log2(double(a.n)), y = std::log2(a.rmse_dagger);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  table.slope_dagger = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  persist_rate(cfg, table, wall);
  return table;
}

ResultTable run_test_study(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const int reps = cfg.replications;
  const int tasks = int(cfg.n_list.size()) * reps;

  ResultTable table;
  table.rows.resize(tasks);
  parallel_tasks(tasks, cfg.threads, [&](int t) {
    const int n = cfg.n_list[t / reps];
    const int rep = t % reps;
    ResultRow& row = table.rows[t];
    row.scenario = cfg.scenario_name();
    row.n = n;
    row.rep = rep;
    row.seed = replication_seed(cfg, n, rep);
    try {
      const SamplePath path = simulate_scenario(cfg, n, row.seed);
      McSettings mc = cfg.mc;
      mc.seed = rng::derive(row.seed, 0x71756e74ULL);  // per-rep conditional quantile
      TestReport rep_out;
      switch (cfg.test) {
        case StudyTest::constancy:
          rep_out = test_constancy(path, cfg.params, cfg.alpha, mc);
          break;
        case StudyTest::gof_constant:
          rep_out = test_gof(path, cfg.params, FunctionClass::constants(), cfg.alpha, mc);
          break;
        case StudyTest::gof_linear:
          rep_out = test_gof(path, cfg.params, FunctionClass::linear(), cfg.alpha, mc);
          break;
      }
      row.statistic = rep_out.statistic;
      row.quantile = rep_out.quantile;
      row.p_value = rep_out.p_value;
      row.reject = rep_out.reject;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });

  for (int n : cfg.n_list) {
    ResultTable::TestAgg agg;
    agg.scenario = cfg.scenario_name();
    agg.n = n;
    int rejects = 0, count = 0, failures = 0;
    for (const auto& r : table.rows) {
      if (r.n != n) continue;
      if (!r.ok) {
        ++failures;
        continue;
      }
      rejects += r.reject ? 1 : 0;
      ++count;
    }
    agg.failures = failures;
    agg.reject_rate = count ? double(rejects) / count : 0.0;
    agg.se = count ? std::sqrt(agg.reject_rate * (1.0 - agg.reject_rate) / count) : 0.0;
    table.test_aggs.push_back(agg);
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  persist_test(cfg, table, wall);
  return table;
}

}  // namespace mbm
