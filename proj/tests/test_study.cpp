#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mbm/study.hpp"

using namespace mbm;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.n_list = {};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.n_list = {128};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.n_list = {256};
  cfg.replications = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.replications = 1;
  CHECK_NOTHROW(validate(cfg));
  cfg.scenario = Scenario::custom;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("scenario thetas") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::jump_h;
  const ThetaFunction jump = scenario_theta(cfg);
  CHECK(jump.hurst(0.2) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(jump.hurst(0.8) == doctest::Approx(0.7).epsilon(1e-12));

  cfg.scenario = Scenario::smooth_h;
  const ThetaFunction smooth = scenario_theta(cfg);
  CHECK(smooth.hurst(0.0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(smooth.hurst(1.0) == doctest::Approx(0.7).epsilon(1e-12));

  cfg.scenario = Scenario::constant_h;
  cfg.sigma_profile = SigmaProfile::sinusoidal;
  const ThetaFunction sinus = scenario_theta(cfg);
  CHECK(sinus.constant_hurst());
  CHECK(sinus.sigma(0.25) == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("rate study: determinism and byte-identical artifacts") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg;
  cfg.scenario = Scenario::constant_h;
  cfg.n_list = {256, 512};
  cfg.replications = 8;
  cfg.seed = 99;
  cfg.output_dir = (fs::temp_directory_path() / "mbm_rate_a").string();
  const ResultTable a = run_rate_study(cfg);
  cfg.output_dir = (fs::temp_directory_path() / "mbm_rate_b").string();
  const ResultTable b = run_rate_study(cfg);

  REQUIRE(a.rows.size() == 16);
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].ok);
    CHECK(a.rows[i].est_dagger[1] == b.rows[i].est_dagger[1]);
  }
  CHECK(slurp(fs::path(cfg.output_dir) / "rate_results.csv") ==
        slurp(fs::path(fs::temp_directory_path() / "mbm_rate_a") / "rate_results.csv"));
  CHECK(slurp(fs::path(cfg.output_dir) / "rate_summary.csv") ==
        slurp(fs::path(fs::temp_directory_path() / "mbm_rate_a") / "rate_summary.csv"));

  // RMSE aggregates exist for each (n, probe) and are finite
  CHECK(a.rate_aggs.size() == 6);
  for (const auto& agg : a.rate_aggs) CHECK(agg.rmse_dagger >= 0.0);
  fs::remove_all(fs::temp_directory_path() / "mbm_rate_a");
  fs::remove_all(fs::temp_directory_path() / "mbm_rate_b");
}

TEST_CASE("test study: crash isolation leaves other rows intact") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::constant_h;
  cfg.n_list = {256, 1024};
  cfg.replications = 3;
  cfg.seed = 7;
  cfg.mc.reps = 1000;
  cfg.params.lag = 20;  // valid for n=1024 (sqrt=32), invalid for n=256 (sqrt=16)
  const ResultTable table = run_test_study(cfg);
  int failed = 0, succeeded = 0;
  for (const auto& row : table.rows) {
    if (row.n == 256) {
      CHECK_FALSE(row.ok);
      CHECK(!row.error.empty());
      CHECK(row.seed != 0);
      ++failed;
    } else {
      CHECK(row.ok);
      ++succeeded;
    }
  }
  CHECK(failed == 3);
  CHECK(succeeded == 3);
  for (const auto& agg : table.test_aggs)
    if (agg.n == 256) CHECK(agg.failures == 3);
}

TEST_CASE("replication seeds are distinct across reps, n, and scenarios") {
  ExperimentConfig cfg;
  cfg.n_list = {256};
  cfg.seed = 1;
  const std::uint64_t a = replication_seed(cfg, 256, 0);
  const std::uint64_t b = replication_seed(cfg, 256, 1);
  const std::uint64_t c = replication_seed(cfg, 512, 0);
  cfg.scenario = Scenario::jump_h;
  const std::uint64_t d = replication_seed(cfg, 256, 0);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a != d);
}
