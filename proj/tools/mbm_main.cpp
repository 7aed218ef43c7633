// mbm command-line tool: simulate paths, estimate Hurst curves, run the
// constancy / goodness-of-fit tests, and drive rate / level-power studies.
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "mbm/core.hpp"
#include "mbm/estimators.hpp"
#include "mbm/fracmath.hpp"
#include "mbm/hypotests.hpp"
#include "mbm/simulate.hpp"
#include "mbm/study.hpp"

namespace {

struct EstimatorFlags {
  double bandwidth = 0;
  double bandwidth_const = 1.0;
  double eta = 1.0;
  int degree = 1;
  int lag = 0;
  double epsilon_floor = 0.2;
  std::string kernel = "epanechnikov";
  std::string support = "two-sided";

  void attach(CLI::App* cmd) {
    cmd->add_option("--bandwidth", bandwidth, "explicit bandwidth (0: rule c*n^{-1/(2 eta+1)})");
    cmd->add_option("--bandwidth-const", bandwidth_const, "constant c of the bandwidth rule");
    cmd->add_option("--eta", eta, "declared Hoelder exponent of the parameter path");
    cmd->add_option("--degree", degree, "local polynomial degree");
    cmd->add_option("--lag", lag, "lag L_n of the integrated estimator (0: ceil(n^0.3))");
    cmd->add_option("--epsilon-floor", epsilon_floor, "relative floor for the moment smooth");
    cmd->add_option("--kernel", kernel, "epanechnikov|uniform|triangular")
        ->check(CLI::IsMember({"epanechnikov", "uniform", "triangular"}));
    cmd->add_option("--support", support, "two-sided|left|right")
        ->check(CLI::IsMember({"two-sided", "left", "right"}));
  }

  mbm::EstimatorParams params() const {
    static const std::map<std::string, mbm::KernelShape> shapes{
        {"epanechnikov", mbm::KernelShape::epanechnikov},
        {"uniform", mbm::KernelShape::uniform},
        {"triangular", mbm::KernelShape::triangular}};
    static const std::map<std::string, mbm::KernelSupport> supports{
        {"two-sided", mbm::KernelSupport::two_sided},
        {"left", mbm::KernelSupport::left},
        {"right", mbm::KernelSupport::right}};
    mbm::EstimatorParams p;
    p.kernel = mbm::Kernel(shapes.at(kernel), supports.at(support));
    p.bandwidth = bandwidth;
    p.bandwidth_const = bandwidth_const;
    p.eta = eta;
    p.degree = degree;
    p.lag = lag;
    p.epsilon_floor = epsilon_floor;
    return p;
  }
};

void write_curve_csv(const std::string& file, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& v) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  out << "u,value\n";
  char buf[80];
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", u[i], v[i]);
    out << buf;
  }
}

mbm::Scenario parse_scenario(const std::string& s) {
  if (s == "constant_h") return mbm::Scenario::constant_h;
  if (s == "smooth_h") return mbm::Scenario::smooth_h;
  if (s == "jump_h") return mbm::Scenario::jump_h;
  return mbm::Scenario::custom;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation and nonparametric inference for a time-varying Hurst exponent"};
  app.set_version_flag("--version", "0.1.0");
  app.set_config("--config", "", "read options from an INI/TOML file");
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "generate sample paths");
  sim->require_subcommand(1);

  struct {
    double hurst = 0.5, sigma = 1.0;
    int n = 1024, lead_in = 3;
    std::uint64_t seed = 0;
    std::string out;
  } fbm;
  auto* sim_fbm = sim->add_subcommand("fbm", "exact fractional Brownian motion");
  sim_fbm->add_option("--hurst", fbm.hurst, "Hurst exponent in (0,1)")->required();
  sim_fbm->add_option("--sigma", fbm.sigma, "scale");
  sim_fbm->add_option("--n", fbm.n, "samples per unit time")->required();
  sim_fbm->add_option("--lead-in", fbm.lead_in, "observations before time 0");
  sim_fbm->add_option("--seed", fbm.seed, "64-bit seed");
  sim_fbm->add_option("--out", fbm.out, "output CSV")->required();

  struct {
    std::string theta_file;
    double hurst = 0.5, sigma = 1.0, eta = 1.0, horizon = 10.0;
    int n = 1024, lead_in = 3, submesh = 16;
    std::string variant = "ito";
    std::uint64_t seed = 0;
    std::string out;
  } mbm_opts;
  auto* sim_mbm = sim->add_subcommand("mbm", "discretized multifractional Brownian motion");
  sim_mbm->add_option("--theta", mbm_opts.theta_file, "theta CSV (v,h,sigma)");
  sim_mbm->add_option("--hurst", mbm_opts.hurst, "constant Hurst (if no theta file)");
  sim_mbm->add_option("--sigma", mbm_opts.sigma, "constant sigma (if no theta file)");
  sim_mbm->add_option("--eta", mbm_opts.eta, "declared Hoelder exponent");
  sim_mbm->add_option("--n", mbm_opts.n, "samples per unit time")->required();
  sim_mbm->add_option("--lead-in", mbm_opts.lead_in, "observations before time 0");
  sim_mbm->add_option("--past-horizon", mbm_opts.horizon, "truncation depth M of the integral");
  sim_mbm->add_option("--submesh", mbm_opts.submesh, "Brownian sub-steps per interval");
  sim_mbm->add_option("--variant", mbm_opts.variant, "ito|classical")
      ->check(CLI::IsMember({"ito", "classical"}));
  sim_mbm->add_option("--seed", mbm_opts.seed, "64-bit seed");
  sim_mbm->add_option("--out", mbm_opts.out, "output CSV")->required();

  // ---- estimate ----
  struct {
    std::string input, method = "smoothed", out, diagnostics;
    int grid = 201;
  } est;
  EstimatorFlags est_flags;
  auto* estimate = app.add_subcommand("estimate", "estimate the Hurst curve from a path CSV");
  estimate->add_option("--input", est.input, "path CSV")->required();
  estimate->add_option("--method", est.method, "log-ratio|smoothed|integrated")
      ->check(CLI::IsMember({"log-ratio", "smoothed", "integrated"}));
  estimate->add_option("--grid", est.grid, "output grid size for the local methods");
  estimate->add_option("--out", est.out, "output CSV (u,value)")->required();
  estimate->add_option("--diagnostics", est.diagnostics, "JSON diagnostics sidecar");
  est_flags.attach(estimate);

  // ---- test ----
  auto* test = app.add_subcommand("test", "hypothesis tests on the Hurst function");
  test->require_subcommand(1);
  struct {
    std::string input, out;
    double alpha = 0.05;
    int mc_reps = 10000, mc_grid = 512;
    std::uint64_t seed = 1;
  } tc;
  EstimatorFlags tc_flags, gof_flags;
  auto* constancy = test->add_subcommand("constancy", "CUSUM test for constant Hurst");
  constancy->add_option("--input", tc.input, "path CSV")->required();
  constancy->add_option("--alpha", tc.alpha, "level");
  constancy->add_option("--mc-reps", tc.mc_reps, "Monte-Carlo replications (>= 1000)");
  constancy->add_option("--mc-grid", tc.mc_grid, "Monte-Carlo sup grid");
  constancy->add_option("--seed", tc.seed, "Monte-Carlo seed");
  constancy->add_option("--out", tc.out, "report JSON");
  tc_flags.attach(constancy);

  struct {
    std::string input, out, cls = "constant", h_file;
    double alpha = 0.05, range_lo = 0.0, range_hi = 1.0;
    int mc_reps = 10000, mc_grid = 512;
    std::uint64_t seed = 1;
  } tg;
  auto* gof = test->add_subcommand("gof", "goodness-of-fit test over a candidate class");
  gof->add_option("--input", tg.input, "path CSV")->required();
  gof->add_option("--class", tg.cls, "constant|linear|singleton")
      ->check(CLI::IsMember({"constant", "linear", "singleton"}));
  gof->add_option("--h-file", tg.h_file, "singleton candidate: CSV v,h,sigma");
  gof->add_option("--range-lo", tg.range_lo, "constant family lower bound");
  gof->add_option("--range-hi", tg.range_hi, "constant family upper bound");
  gof->add_option("--alpha", tg.alpha, "level");
  gof->add_option("--mc-reps", tg.mc_reps, "Monte-Carlo replications (>= 1000)");
  gof->add_option("--mc-grid", tg.mc_grid, "Monte-Carlo sup grid");
  gof->add_option("--seed", tg.seed, "Monte-Carlo seed");
  gof->add_option("--out", tg.out, "report JSON");
  gof_flags.attach(gof);

  // ---- study ----
  auto* study = app.add_subcommand("study", "replicated experiments");
  study->require_subcommand(1);
  struct {
    std::string scenario = "constant_h", sigma_profile = "constant", theta_file, out_dir;
    double h0 = 0.5, eta = 1.0, alpha = 0.05, horizon = 10.0;
    std::vector<int> n_list;
    int replications = 100, submesh = 16, threads = 0;
    int mc_reps = 4000, mc_grid = 512;
    std::uint64_t seed = 0;
    std::string test_kind = "constancy";
  } st;
  EstimatorFlags rate_flags, power_flags;

  auto attach_study = [&](CLI::App* cmd, EstimatorFlags& flags) {
    cmd->add_option("--scenario", st.scenario, "constant_h|smooth_h|jump_h|custom")
        ->check(CLI::IsMember({"constant_h", "smooth_h", "jump_h", "custom"}));
    cmd->add_option("--sigma-profile", st.sigma_profile, "constant|sinusoidal")
        ->check(CLI::IsMember({"constant", "sinusoidal"}));
    cmd->add_option("--theta", st.theta_file, "theta CSV for the custom scenario");
    cmd->add_option("--h0", st.h0, "constant-scenario Hurst level");
    cmd->add_option("--eta", st.eta, "declared Hoelder exponent");
    cmd->add_option("--n-list", st.n_list, "sample sizes")->required();
    cmd->add_option("--replications", st.replications, "replications per n");
    cmd->add_option("--seed", st.seed, "base seed");
    cmd->add_option("--out-dir", st.out_dir, "output directory")->required();
    cmd->add_option("--threads", st.threads, "parallelism cap (0: all cores)");
    cmd->add_option("--past-horizon", st.horizon, "mBm truncation depth");
    cmd->add_option("--submesh", st.submesh, "mBm Brownian sub-steps");
    flags.attach(cmd);
  };
  auto* rate = study->add_subcommand("rate", "RMSE vs n for the local estimators");
  attach_study(rate, rate_flags);
  auto* power = study->add_subcommand("level-power", "rejection-rate table for a test");
  attach_study(power, power_flags);
  power->add_option("--test", st.test_kind, "constancy|gof-constant|gof-linear")
      ->check(CLI::IsMember({"constancy", "gof-constant", "gof-linear"}));
  power->add_option("--alpha", st.alpha, "level");
  power->add_option("--mc-reps", st.mc_reps, "Monte-Carlo replications per test");
  power->add_option("--mc-grid", st.mc_grid, "Monte-Carlo sup grid");

  // ---- fracmath ----
  auto* fracmath = app.add_subcommand("fracmath", "covariance diagnostics");
  struct {
    double hurst = 0.5;
    long h_max = 1000;
    double tail_tol = 1e-10;
  } fm;
  auto* tau2 = fracmath->add_subcommand("tau2", "print the asymptotic variance tau^2(H)");
  tau2->add_option("--hurst", fm.hurst, "Hurst exponent")->required();
  tau2->add_option("--h-max", fm.h_max, "truncation lag");
  tau2->add_option("--tail-tol", fm.tail_tol, "tail tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (sim_fbm->parsed()) {
      const mbm::SamplePath path =
          mbm::simulate_fbm({fbm.hurst, fbm.sigma, fbm.n, fbm.lead_in, fbm.seed});
      mbm::write_path_csv(path, fbm.out);
      std::cout << "wrote " << fbm.out << " (n=" << fbm.n << ")\n";
    } else if (sim_mbm->parsed()) {
      mbm::ThetaFunction theta =
          mbm_opts.theta_file.empty()
              ? mbm::ThetaFunction(Eigen::VectorXd::Constant(2, mbm_opts.hurst),
                                   Eigen::VectorXd::Constant(2, mbm_opts.sigma),
                                   mbm_opts.eta)
              : mbm::read_theta_csv(mbm_opts.theta_file, mbm_opts.eta);
      mbm::MbmConfig cfg{std::move(theta), mbm_opts.n, mbm_opts.lead_in,
                         mbm_opts.horizon, mbm_opts.submesh,
                         mbm_opts.variant == "ito" ? mbm::MbmVariant::ito
                                                   : mbm::MbmVariant::classical,
                         mbm_opts.seed};
      mbm::MbmDiagnostics diag;
      const mbm::SamplePath path = mbm::simulate_mbm(cfg, &diag);
      mbm::write_path_csv(path, mbm_opts.out);
      std::cout << "wrote " << mbm_opts.out << " (n=" << mbm_opts.n
                << ", exponent classes=" << diag.exponent_classes
                << ", fft=" << (diag.fft_path ? "yes" : "no") << ")\n";
      if (diag.horizon_warning)
        std::cerr << "warning: past horizon may be too small (tail ratio "
                  << diag.horizon_tail_ratio << ")\n";
    } else if (estimate->parsed()) {
      const mbm::SamplePath path = mbm::read_path_csv(est.input);
      const mbm::IncrementPair inc = mbm::increments(path);
      mbm::EstimatorParams params = est_flags.params();
      mbm::EstimatorDiagnostics diag;
      Eigen::VectorXd u, v;
      if (est.method == "integrated") {
        if (params.kernel.support() != mbm::KernelSupport::left)
          params.kernel = mbm::Kernel(params.kernel.shape(), mbm::KernelSupport::left);
        const mbm::IntegratedCurve curve = mbm::integrated_hurst(inc, params, &diag);
        u = curve.u;
        v = curve.value;
      } else {
        u = Eigen::VectorXd::LinSpaced(est.grid, 0.0, 1.0);
        const mbm::HurstCurve curve =
            est.method == "log-ratio" ? mbm::hurst_log_ratio(inc, params, u, &diag)
                                      : mbm::hurst_smoothed_log(inc, params, u, &diag);
        v = curve.value;
      }
      write_curve_csv(est.out, u, v);
      if (!est.diagnostics.empty()) {
        std::ofstream out(est.diagnostics);
        out << "{\n  \"clip_count\": " << diag.clip_count
            << ",\n  \"clamp_count\": " << diag.clamp_count
            << ",\n  \"excluded_log_entries\": " << diag.excluded_log_entries
            << ",\n  \"reliability_warning\": " << (diag.reliability_warning ? "true" : "false")
            << ",\n  \"bandwidth\": " << diag.bandwidth_used
            << ",\n  \"lag\": " << diag.lag_used << "\n}\n";
      }
      std::cout << "wrote " << est.out << "\n";
    } else if (constancy->parsed()) {
      const mbm::SamplePath path = mbm::read_path_csv(tc.input);
      const mbm::TestReport rep = mbm::test_constancy(
          path, tc_flags.params(), tc.alpha, {tc.mc_reps, tc.mc_grid, tc.seed});
      std::cout << rep.summary() << "\n";
      if (!tc.out.empty()) std::ofstream(tc.out) << mbm::to_json(rep) << "\n";
    } else if (gof->parsed()) {
      const mbm::SamplePath path = mbm::read_path_csv(tg.input);
      mbm::FunctionClass cls = mbm::FunctionClass::constants(tg.range_lo, tg.range_hi);
      if (tg.cls == "linear") {
        cls = mbm::FunctionClass::linear();
      } else if (tg.cls == "singleton") {
        if (tg.h_file.empty())
          throw std::invalid_argument("singleton class needs --h-file");
        const mbm::ThetaFunction theta = mbm::read_theta_csv(tg.h_file, 1.0);
        Eigen::VectorXd h(int(theta.samples()));
        for (int i = 0; i < h.size(); ++i)
          h[i] = theta.hurst(double(i) / double(h.size() - 1));
        cls = mbm::FunctionClass::singleton(h);
      }
      const mbm::TestReport rep = mbm::test_gof(path, gof_flags.params(), cls, tg.alpha,
                                                {tg.mc_reps, tg.mc_grid, tg.seed});
      std::cout << rep.summary() << "\n";
      if (!tg.out.empty()) std::ofstream(tg.out) << mbm::to_json(rep) << "\n";
    } else if (rate->parsed() || power->parsed()) {
      mbm::ExperimentConfig cfg;
      cfg.scenario = parse_scenario(st.scenario);
      cfg.sigma_profile = st.sigma_profile == "sinusoidal" ? mbm::SigmaProfile::sinusoidal
                                                           : mbm::SigmaProfile::constant;
      cfg.theta_file = st.theta_file;
      cfg.h0 = st.h0;
      cfg.eta = st.eta;
      cfg.n_list = st.n_list;
      cfg.replications = st.replications;
      cfg.params = (rate->parsed() ? rate_flags : power_flags).params();
      cfg.mc = {st.mc_reps, st.mc_grid, 1};
      cfg.alpha = st.alpha;
      cfg.test = st.test_kind == "gof-constant" ? mbm::StudyTest::gof_constant
                 : st.test_kind == "gof-linear" ? mbm::StudyTest::gof_linear
                                                : mbm::StudyTest::constancy;
      cfg.past_horizon = st.horizon;
      cfg.submesh = st.submesh;
      cfg.seed = st.seed;
      cfg.output_dir = st.out_dir;
      cfg.threads = st.threads;
      const mbm::ResultTable table =
          rate->parsed() ? mbm::run_rate_study(cfg) : mbm::run_test_study(cfg);
      if (rate->parsed()) {
        for (const auto& a : table.rate_aggs)
          std::cout << "n=" << a.n << " probe=" << a.probe
                    << " rmse_dagger=" << a.rmse_dagger
                    << " rmse_logratio=" << a.rmse_logratio << "\n";
        std::cout << "slope(dagger, u=0.5) = " << table.slope_dagger << "\n";
      } else {
        for (const auto& a : table.test_aggs)
          std::cout << a.scenario << " n=" << a.n << " reject_rate=" << a.reject_rate
                    << " se=" << a.se << " failures=" << a.failures << "\n";
      }
      std::cout << "results in " << st.out_dir << "\n";
    } else if (tau2->parsed()) {
      std::cout << mbm::tau_squared(fm.hurst, {fm.h_max, fm.tail_tol}) << "\n";
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
