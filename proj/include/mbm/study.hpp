// Experiment orchestration: seeded scenario simulation, rate studies and
// level/power tables, persisted as flat CSV plus a JSON manifest.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mbm/estimators.hpp"
#include "mbm/hypotests.hpp"
#include "mbm/simulate.hpp"

namespace mbm {

enum class Scenario { constant_h, smooth_h, jump_h, custom };
enum class SigmaProfile { constant, sinusoidal };
enum class StudyTest { constancy, gof_constant, gof_linear };

struct ExperimentConfig {
  Scenario scenario = Scenario::constant_h;
  SigmaProfile sigma_profile = SigmaProfile::constant;
  double h0 = 0.5;
  double jump_lo = 0.3, jump_hi = 0.7, jump_at = 0.5;
  double smooth_lo = 0.4, smooth_hi = 0.7;
  std::string theta_file;  // custom scenario
  double eta = 1.0;

  std::vector<int> n_list;
  int replications = 1;
  EstimatorParams params;
  McSettings mc;
  double alpha = 0.05;
  StudyTest test = StudyTest::constancy;
  double past_horizon = 10.0;
  int submesh = 16;
  std::uint64_t seed = 0;
  std::string output_dir;  // empty: in-memory only
  int threads = 0;         // 0: library default

  std::string scenario_name() const;
};

// Fails fast on invalid settings (exit code 2 territory in the CLI).
void validate(const ExperimentConfig& cfg);

ThetaFunction scenario_theta(const ExperimentConfig& cfg);
SamplePath simulate_scenario(const ExperimentConfig& cfg, int n, std::uint64_t rep_seed);
std::uint64_t replication_seed(const ExperimentConfig& cfg, int n, int rep);

inline constexpr std::array<double, 3> kProbes{0.25, 0.5, 0.75};

struct ResultRow {
  std::string scenario;
  int n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::array<double, 3> est_dagger{};    // rate study
  std::array<double, 3> est_logratio{};
  double statistic = 0, quantile = 0, p_value = 0;  // test study
  bool reject = false;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  struct RateAgg {
    int n = 0;
    double probe = 0;
    double rmse_dagger = 0, rmse_logratio = 0;
  };
  std::vector<RateAgg> rate_aggs;
  double slope_dagger = 0;  // log-log slope of RMSE(dagger, u=0.5) vs n

  struct TestAgg {
    std::string scenario;
    int n = 0;
    double reject_rate = 0, se = 0;
    int failures = 0;
  };
  std::vector<TestAgg> test_aggs;
};

ResultTable run_rate_study(const ExperimentConfig& cfg);
ResultTable run_test_study(const ExperimentConfig& cfg);

}  // namespace mbm
