#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rqed/cli/app.hpp"

namespace fs = std::filesystem;
using rqed::cli::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rqed");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = rqed::cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("rqed_cli_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path config(const std::string& name, const json& doc) {
    const auto p = root_ / name;
    std::ofstream(p) << doc.dump();
    return p;
  }

  fs::path root_;
};

}  // namespace

TEST_F(CliTest, FelDefaults) {
  const auto out = root_ / "fel";
  const auto r = run_cli({"fel", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(out / "fel.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"rho", "P_z", "A0", "t_gain", "ratio"}));
  EXPECT_NEAR(std::stod(rows[1][2]), 5.1e-13, 0.1 * 5.1e-13);
  EXPECT_NEAR(std::stod(rows[1][3]), 2.6e-6, 0.1 * 2.6e-6);
}

TEST_F(CliTest, GlobalOptionsBeforeSubcommand) {
  const auto out = root_ / "o";
  const auto r = run_cli({"--out", out.string(), "fel"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "fel.csv"));
}

TEST_F(CliTest, HelpAndMissingSubcommand) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"teleport"}).code, 2);
}

TEST_F(CliTest, MeasureIsByteDeterministic) {
  const auto a = root_ / "a";
  const auto b = root_ / "b";
  const auto c = root_ / "c";
  const std::vector<std::string> base{"measure", "--amplitudes", "0.6,0.8", "--samples", "20000"};
  auto with = [&](const fs::path& out, const std::string& seed) {
    auto args = base;
    args.insert(args.end(), {"--seed", seed, "--out", out.string()});
    return run_cli(args);
  };
  ASSERT_EQ(with(a, "11").code, 0);
  ASSERT_EQ(with(b, "11").code, 0);
  ASSERT_EQ(with(c, "12").code, 0);
  EXPECT_EQ(slurp(a / "measure.json"), slurp(b / "measure.json"));
  EXPECT_NE(slurp(a / "measure.json"), slurp(c / "measure.json"));

  const auto doc = json::parse(slurp(a / "measure.json"));
  EXPECT_EQ(doc["ledger"]["readings"].get<std::uint64_t>(), 20000u);
  const double kT = rqed::PhysicalConstants{}.k_B * 310.0;
  EXPECT_EQ(doc["ledger"]["total"].get<double>(), 20000.0 * kT);
}

TEST_F(CliTest, ValidationFailureWritesNothing) {
  const auto out = root_ / "never";
  const auto r = run_cli({"measure", "--amplitudes", "0.6,0.6", "--out", out.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("normalized"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, UnknownKeyNamesItsPath) {
  const auto cfg = config("bad.json", json{{"fel", {{"P_z", 4.9e-7}, {"bogus", 1}}}});
  const auto r = run_cli({"fel", "--config", cfg.string(), "--out", (root_ / "x").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/fel/bogus"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(root_ / "x"));
}

TEST_F(CliTest, MalformedJsonRejected) {
  const auto p = root_ / "broken.json";
  std::ofstream(p) << "{\"fel\": ";
  EXPECT_EQ(run_cli({"fel", "--config", p.string()}).code, 2);
}

TEST_F(CliTest, PhysicsDomainErrorMapsToTwo) {
  const auto cfg = config("d.json", json{{"fel", {{"rho", -1.0}}}});
  EXPECT_EQ(run_cli({"fel", "--config", cfg.string(), "--out", (root_ / "d").string()}).code, 2);
}

TEST_F(CliTest, NumericalFailureMapsToThree) {
  json dyn = json::parse(slurp(fs::path(RQED_SAMPLES_DIR) / "dynamics.json"));
  dyn["dynamics"]["initial"]["q"] = json::array({json::array({1.7e308, 0.0}), json::array({1.7e308, 0.0})});
  dyn["dynamics"]["steps"] = 100;
  const auto cfg = config("dyn.json", dyn);
  const auto out = root_ / "dyn";
  const auto r = run_cli({"dynamics", "--config", cfg.string(), "--out", out.string()});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, SingleValueSweepEqualsPlainRun) {
  const auto plain = root_ / "plain";
  const auto sweep = root_ / "sweep";
  ASSERT_EQ(run_cli({"fel", "--out", plain.string()}).code, 0);
  ASSERT_EQ(run_cli({"fel", "--sweep", "/fel/P_z=4.9e-7", "--out", sweep.string()}).code, 0);
  const auto a = read_csv(plain / "fel.csv");
  const auto b = read_csv(sweep / "fel_sweep.csv");
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0][0], "sweep_value");
  EXPECT_EQ(std::vector<std::string>(b[1].begin() + 1, b[1].end()), a[1]);
}

TEST_F(CliTest, DensitySweepIsMonotone) {
  const auto out = root_ / "s";
  const auto r = run_cli({"fel", "--sweep", "/fel/rho=1e16:1e18:7:log", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(out / "fel_sweep.csv");
  ASSERT_EQ(rows.size(), 8u);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    EXPECT_GT(std::stod(rows[i][3]), std::stod(rows[i - 1][3]));  // A0 grows
    EXPECT_LT(std::stod(rows[i][4]), std::stod(rows[i - 1][4]));  // t_gain shrinks
  }
}

TEST_F(CliTest, SweepWorkersDoNotChangeOutput) {
  const auto a = root_ / "w1";
  const auto b = root_ / "w3";
  const std::string sweep = "/measure/samples=100,200,300,400,500";
  ASSERT_EQ(run_cli({"measure", "--amplitudes", "0.6,0.8", "--sweep", sweep, "--workers", "1", "--out", a.string()}).code, 0);
  ASSERT_EQ(run_cli({"measure", "--amplitudes", "0.6,0.8", "--sweep", sweep, "--workers", "3", "--out", b.string()}).code, 0);
  EXPECT_EQ(slurp(a / "measure_sweep.csv"), slurp(b / "measure_sweep.csv"));
}

TEST_F(CliTest, TemperatureSweepBelowThresholdIsNormal) {
  const auto out = root_ / "pd";
  const auto r = run_cli({"phase-diagram", "--rho-max", "0.9", "--nx", "10", "--ny", "10", "--sweep",
                          "/phase-diagram/t_max=0.5,1,2", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(out / "phase_diagram_sweep.csv");
  ASSERT_EQ(rows.size(), 301u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][3], "N");
}

TEST_F(CliTest, UnresolvableSweepPath) {
  auto r = run_cli({"fel", "--sweep", "/fel/nope/x=1", "--out", (root_ / "u").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("does not resolve"), std::string::npos) << r.err;
  r = run_cli({"fel", "--sweep", "/lattice/l_c=1", "--out", (root_ / "u").string()});
  EXPECT_EQ(r.code, 2);
  r = run_cli({"fel", "--sweep", "/fel/P_z", "--out", (root_ / "u").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(root_ / "u"));
}

TEST_F(CliTest, SweepFromConfig) {
  const auto cfg = config("s.json", json{{"sweep", {{"path", "/constants/eps_w"}, {"values", {5.06e-22, 1.012e-21}}}},
                                         {"lattice",
                                          {{"l_c", 1e-3},
                                           {"extents", {4e-3, 4e-3, 4e-3}},
                                           {"field", {{"preset", "uniform"}, {"rho", 2.0}, {"T", 0.1}}}}}});
  const auto out = root_ / "cfg";
  const auto r = run_cli({"lattice", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(out / "lattice_sweep.csv");
  ASSERT_EQ(rows.size(), 3u);
  // Normalized field units follow the gap, so both points are fully superradiant.
  EXPECT_EQ(rows[1][1], "1");
  EXPECT_EQ(rows[2][1], "1");
}

TEST_F(CliTest, EverySampleConfigRuns) {
  for (const auto& entry : fs::directory_iterator(RQED_SAMPLES_DIR)) {
    const auto doc = json::parse(slurp(entry.path()));
    std::string command;
    for (const auto& name : rqed::cli::command_names())
      if (doc.contains(name)) command = name;
    ASSERT_FALSE(command.empty()) << entry.path();
    const auto out = root_ / entry.path().stem();
    const auto r = run_cli({command, "--config", entry.path().string(), "--out", out.string()});
    EXPECT_EQ(r.code, 0) << entry.path() << ": " << r.err;
    EXPECT_FALSE(fs::is_empty(out)) << entry.path();
  }
}

TEST_F(CliTest, DecoherenceSampleReport) {
  const auto out = root_ / "dec";
  const auto r = run_cli({"decoherence", "--config", (fs::path(RQED_SAMPLES_DIR) / "decoherence.json").string(),
                          "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(slurp(out / "decoherence_report.json"));
  const double progress = doc["report"]["progress"].get<double>();
  EXPECT_NEAR(progress, std::pow(1.0 / std::sin(1.0), 100), 1e-6 * progress);
  EXPECT_TRUE(doc["report"]["satisfied"].get<bool>());
  EXPECT_NEAR(doc["criterion_forms"]["ratio"].get<double>(), 1.0, 1e-9);
  const auto rows = read_csv(out / "decoherence_rho.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_NEAR(std::stod(rows[2][2]), 0.5 / progress, 1e-6 * 0.5 / progress);
}

TEST_F(CliTest, LatticeSampleLatches) {
  const auto out = root_ / "lat";
  const auto r = run_cli({"lattice", "--config", (fs::path(RQED_SAMPLES_DIR) / "lattice.json").string(),
                          "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(slurp(out / "lattice_stats.json"));
  const auto& rw = doc["rewrites"];
  ASSERT_EQ(rw.size(), 2u);
  EXPECT_EQ(rw[0]["flipped"].get<std::size_t>(), 0u);
  EXPECT_GT(rw[0]["held"].get<std::size_t>(), 0u);
  EXPECT_EQ(rw[1]["cleared"].get<std::size_t>(), rw[0]["held"].get<std::size_t>());
  EXPECT_EQ(doc["ones"].get<std::size_t>(), 0u);
}

TEST(CliBinary, ExitCodes) {
  const std::string bin = RQED_CLI_PATH;
  EXPECT_EQ(std::system((bin + " --help > /dev/null").c_str()), 0);
  const int bad = std::system((bin + " fel --sweep nonsense > /dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(bad));
  EXPECT_EQ(WEXITSTATUS(bad), 2);
}
