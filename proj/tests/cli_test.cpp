#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ecuas/ecuas.hpp"

namespace ecuas {
namespace {

namespace fs = std::filesystem;

const fs::path kFixtures{ECUAS_FIXTURES};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ecuas_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI and returns its exit code; stderr lands in err_.
  int run(const std::string& args) {
    const auto err_path = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + ECUAS_CLI + "\" " + args + " >/dev/null 2>\"" + err_path.string() + "\"";
    const int status = std::system(cmd.c_str());
    err_ = slurp(err_path);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::string err_;
};

nlohmann::json golden() {
  std::ifstream in(kFixtures / "golden.json");
  return nlohmann::json::parse(in);
}

void expect_matches_golden(const EvaluationReport& report, const nlohmann::json& expected) {
  for (const auto& [name, value] : expected.items()) {
    ASSERT_TRUE(report.has_metric(name)) << name;
    EXPECT_NEAR(report.metric(name), value.get<double>(), 1e-9) << name;
  }
}

TEST_F(Cli, EvaluatePosteriorMatchesGolden) {
  const auto input = (kFixtures / "synthetic_posteriors.csv").string();
  ASSERT_EQ(run("evaluate --input " + input + " --normalize --out " + path("r.json") + " --format json"), 0) << err_;
  const auto report = read_report(path("r.json"), Format::Json);
  expect_matches_golden(report, golden()["synthetic_posteriors"]["metrics"]);
  std::vector<std::string> names;
  for (const auto& [k, v] : report.metrics) names.push_back(k);
  const std::vector<std::string> expected_order{"ER",   "ECE",     "AUC",     "CE_qe",     "BS_qe",
                                                "CE_q", "BS_q",    "AURC",    "ECUAS_0",   "ECUAS_1",
                                                "ECUAS_128", "N-ER", "N-CE_qe", "N-BS_qe", "N-CE_q",
                                                "N-BS_q", "N-ECUAS_0", "N-ECUAS_1", "N-ECUAS_128"};
  EXPECT_EQ(names, expected_order);
}

TEST_F(Cli, EvaluateGenerativeMatchesGolden) {
  const auto input = (kFixtures / "generative_mini.csv").string();
  ASSERT_EQ(run("evaluate --input " + input + " --kind generative --cost zero-one-inf --out " + path("inf.csv")), 0)
      << err_;
  expect_matches_golden(read_report(path("inf.csv"), Format::Csv), golden()["generative_mini_inf"]["metrics"]);
  ASSERT_EQ(run("evaluate --input " + input + " --kind generative --K 4 --out " + path("k4.csv")), 0) << err_;
  const auto k4 = read_report(path("k4.csv"), Format::Csv);
  expect_matches_golden(k4, golden()["generative_mini_k4"]["metrics"]);
  EXPECT_GT(k4.diagnostics.u_above_max, 0u);
  EXPECT_NE(err_.find("above u_M"), std::string::npos);
}

TEST_F(Cli, NormalizeWithGenerativeIsRefused) {
  const auto input = (kFixtures / "generative_mini.csv").string();
  EXPECT_EQ(run("evaluate --input " + input + " --kind generative --cost zero-one-inf --normalize --out " +
                path("r.csv")),
            2);
  EXPECT_NE(err_.find("normalize"), std::string::npos) << err_;
  EXPECT_FALSE(fs::exists(path("r.csv")));
}

TEST_F(Cli, MissingKIsAValidationError) {
  const auto input = (kFixtures / "generative_mini.csv").string();
  EXPECT_EQ(run("evaluate --input " + input + " --kind generative --out " + path("r.csv")), 2);
  EXPECT_NE(err_.find("K"), std::string::npos) << err_;
}

TEST_F(Cli, NOrderFollowsRequest) {
  const auto input = (kFixtures / "synthetic_posteriors.csv").string();
  ASSERT_EQ(run("evaluate --input " + input + " --n 128,0.5,1 --out " + path("r.csv")), 0) << err_;
  const auto r = read_report(path("r.csv"), Format::Csv);
  std::vector<std::string> ecuas_names;
  for (const auto& [k, v] : r.metrics) {
    if (k.rfind("ECUAS_", 0) == 0) ecuas_names.push_back(k);
  }
  EXPECT_EQ(ecuas_names, (std::vector<std::string>{"ECUAS_128", "ECUAS_0.5", "ECUAS_1"}));
}

TEST_F(Cli, IdenticalRunsAreByteIdentical) {
  const auto input = (kFixtures / "synthetic_posteriors.csv").string();
  for (const char* fmt : {"csv", "json"}) {
    ASSERT_EQ(run("evaluate --input " + input + " --normalize --format " + fmt + " --out " + path("a")), 0);
    ASSERT_EQ(run("evaluate --input " + input + " --normalize --format " + fmt + " --out " + path("b")), 0);
    EXPECT_EQ(slurp(path("a")), slurp(path("b")));
  }
  const auto json = nlohmann::json::parse(slurp(path("a")));
  EXPECT_EQ(json["config"]["n"], "0,1,128");
  EXPECT_EQ(json["config"]["ece_bins"], "15");
  EXPECT_TRUE(json["diagnostics"].contains("u_above_max"));
}

TEST_F(Cli, EnvironmentOverridesEpsilon) {
  const auto input = (kFixtures / "generative_mini.csv").string();
  const std::string base = "evaluate --input " + input + " --kind generative --cost zero-one-inf --format json";
  ASSERT_EQ(run(base + " --out " + path("a.json")), 0);
  ::setenv("ECUAS_EPS_Q", "1e-3", 1);
  const int code = run(base + " --out " + path("b.json"));
  ::unsetenv("ECUAS_EPS_Q");
  ASSERT_EQ(code, 0) << err_;
  const auto a = nlohmann::json::parse(slurp(path("a.json")));
  const auto b = nlohmann::json::parse(slurp(path("b.json")));
  EXPECT_EQ(b["config"]["eps_q"], "0.001");
  EXPECT_NE(a["metrics"]["ECUAS_0"], b["metrics"]["ECUAS_0"]);
}

TEST_F(Cli, CalibrateImprovesAndIsDeterministic) {
  const auto input = (kFixtures / "synthetic_posteriors.csv").string();
  ASSERT_EQ(run("calibrate --input " + input + " --seed 3 --out " + path("cal.csv")), 0) << err_;
  ASSERT_EQ(run("calibrate --input " + input + " --seed 3 --out " + path("cal2.csv")), 0) << err_;
  EXPECT_EQ(slurp(path("cal.csv")), slurp(path("cal2.csv")));
  const auto meta = nlohmann::json::parse(slurp(path("cal.csv") + ".json"));
  EXPECT_EQ(meta["folds"], 5);
  EXPECT_EQ(meta["models"].size(), 5u);
  EXPECT_NO_THROW(read_posterior_csv(path("cal.csv")));

  ASSERT_EQ(run("evaluate --input " + input + " --out " + path("raw.csv")), 0);
  ASSERT_EQ(run("evaluate --input " + path("cal.csv") + " --out " + path("cal_report.csv")), 0);
  const auto raw = read_report(path("raw.csv"), Format::Csv);
  const auto cal = read_report(path("cal_report.csv"), Format::Csv);
  EXPECT_LT(cal.metric("CE_q"), raw.metric("CE_q"));
  EXPECT_LT(cal.metric("ECE"), raw.metric("ECE"));
  EXPECT_LT(cal.metric("ECUAS_0"), raw.metric("ECUAS_0"));
}

TEST_F(Cli, CalibrateTooFewSamples) {
  const auto small = path("small.csv");
  std::ofstream(small) << "label,q_0,q_1\n0,0.9,0.1\n1,0.2,0.8\n0,0.6,0.4\n";
  EXPECT_EQ(run("calibrate --input " + small + " --out " + path("o.csv")), 2);
}

TEST_F(Cli, CostCurveInfiniteMatchesGeneralizedCost) {
  ASSERT_EQ(run("curves cost-curve --n 0 --K inf --grid 50 --out " + path("c.csv")), 0) << err_;
  const auto t = read_table_csv(path("c.csv"));
  ASSERT_EQ(t.rows.size(), 50u);
  for (const auto& row : t.rows) {
    EXPECT_EQ(row[1], c_n01g(true, row[0], 0.0));
    EXPECT_EQ(row[2], c_n01g(false, row[0], 0.0));
  }
}

TEST_F(Cli, GammaSweepIntegratesToEcuas) {
  const auto input = (kFixtures / "synthetic_posteriors.csv").string();
  ASSERT_EQ(run("curves gamma-sweep --input " + input + " --n 1,4 --format json --out " + path("s.json")), 0)
      << err_;
  const auto j = nlohmann::json::parse(slurp(path("s.json")));
  for (const char* n : {"1", "4"}) {
    const double integral = parse_double(j["config"][std::string("sweep_integral_n=") + n].get<std::string>(), "x");
    const double direct = parse_double(j["config"][std::string("ecuas_n=") + n].get<std::string>(), "x");
    EXPECT_NEAR(integral, direct, 1e-3) << "n=" << n;
  }
}

TEST_F(Cli, TemperatureRunsAndIsSeeded) {
  const auto input = (kFixtures / "synthetic_posteriors.csv").string();
  ASSERT_EQ(run("curves temperature --input " + input + " --seed 4 --out " + path("a.csv")), 0) << err_;
  ASSERT_EQ(run("curves temperature --input " + input + " --seed 4 --out " + path("b.csv")), 0) << err_;
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(read_table_csv(path("a.csv")).rows.size(), 13u * 3u);
  EXPECT_EQ(run("curves temperature --input " + input + " --t-grid 1,-1 --out " + path("c.csv")), 2);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("curves"), 0);
  EXPECT_NE(run("curves nonsense"), 0);
  EXPECT_NE(run("bogus"), 0);
  EXPECT_EQ(run("evaluate --input " + path("missing.csv") + " --out " + path("r.csv")), 2);
}

TEST_F(Cli, UndefinedNormalizationIsNumericFailure) {
  const auto one_class = path("one.csv");
  std::ofstream(one_class) << "label,q_0,q_1\n0,0.9,0.1\n0,0.8,0.2\n";
  EXPECT_EQ(run("evaluate --input " + one_class + " --normalize --out " + path("r.csv")), 3);
}

}  // namespace
}  // namespace ecuas
