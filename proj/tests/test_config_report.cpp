#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "uwb/config.hpp"
#include "uwb/errors.hpp"
#include "uwb/report.hpp"

using namespace uwb;

TEST_CASE("config parsing and typed access") {
  const Config cfg = Config::parse_string(
      "# comment\n"
      "[synth]\n"
      "n_los = 200   # trailing comment\n"
      "gamma = 1e-20\n"
      "flag = true\n"
      "\n"
      "[simulate]\n"
      "p_los = 0, 0.2, 0.5\n"
      "estimators = LS, ML-2D\n");

  CHECK(cfg.get_int("synth", "n_los", 0) == 200);
  CHECK(cfg.get_double("synth", "gamma", 0.0) == 1e-20);
  CHECK(cfg.get_bool("synth", "flag", false));
  CHECK(cfg.get_int("synth", "missing", 7) == 7);
  const auto ps = cfg.get_double_list("simulate", "p_los", {});
  REQUIRE(ps.size() == 3);
  CHECK(ps[1] == 0.2);
  const auto est = cfg.get_string_list("simulate", "estimators", {});
  REQUIRE(est.size() == 2);
  CHECK(est[1] == "ML-2D");

  // Everything touched: both sections pass the unknown-key audit.
  CHECK_NOTHROW(cfg.check_consumed("synth"));
  CHECK_NOTHROW(cfg.check_consumed("simulate"));
}

TEST_CASE("config rejects unknown keys per section") {
  const Config cfg = Config::parse_string("[synth]\nn_los=1\ntypo_key=3\n");
  CHECK(cfg.get_int("synth", "n_los", 0) == 1);
  CHECK_THROWS_WITH_AS(cfg.check_consumed("synth"),
                       doctest::Contains("typo_key"), ConfigError);
}

TEST_CASE("config syntax errors carry locations") {
  CHECK_THROWS_WITH_AS(Config::parse_string("[synth\n"),
                       doctest::Contains(":1:"), ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse_string("[s]\njust a line\n"),
                       doctest::Contains(":2:"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("orphan = 1\n"), ConfigError);
  const Config cfg = Config::parse_string("[a]\nx = abc\n");
  CHECK_THROWS_AS(cfg.get_double("a", "x", 0.0), ConfigError);
  CHECK_THROWS_AS(cfg.get_bool("a", "x", false), ConfigError);
}

TEST_CASE("rmse plot holds one column per estimator") {
  std::vector<RmseRow> rows = {
      {"LS", 0.0, 0.5, 100},  {"LS", 1.0, 0.1, 100},
      {"VE", 0.0, 0.4, 100},  {"VE", 1.0, 0.1, 100},
  };
  const auto path =
      std::filesystem::temp_directory_path() / "uwbloc_test_rmseplot.dat";
  write_rmse_plot(rows, path);
  std::ifstream in(path);
  std::string header, line0, line1;
  std::getline(in, header);
  std::getline(in, line0);
  std::getline(in, line1);
  CHECK(header == "# p_los LS VE");
  CHECK(line0 == "0 0.5 0.4");
  CHECK(line1 == "1 0.1 0.1");
  std::filesystem::remove(path);
}

TEST_CASE("cdf plots split by p_los with per-estimator blocks") {
  std::vector<CdfRow> rows = {
      {"LS", 0.2, 0.1, 0.5}, {"LS", 0.2, 0.3, 1.0},
      {"VE", 0.2, 0.2, 0.5}, {"VE", 0.2, 0.25, 1.0},
      {"LS", 0.9, 0.05, 1.0},
  };
  const auto dir = std::filesystem::temp_directory_path() / "uwbloc_cdfplots";
  std::filesystem::create_directories(dir);
  const auto written = write_cdf_plots(rows, dir);
  REQUIRE(written.size() == 2);
  CHECK(written[0].filename() == "cdf_p0.2.dat");
  std::ifstream in(written[0]);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("# estimator=LS") != std::string::npos);
  CHECK(text.find("# estimator=VE") != std::string::npos);
  CHECK(text.find("0.1 0.5") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv readers validate headers") {
  const auto path = std::filesystem::temp_directory_path() / "uwbloc_bad.csv";
  std::ofstream(path) << "wrong,header\n";
  CHECK_THROWS_AS(read_rmse_csv(path), DataError);
  CHECK_THROWS_AS(read_cdf_csv(path), DataError);
  std::filesystem::remove(path);
}
