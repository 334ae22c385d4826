#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "zeno_schur/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("zs_cli_" + std::string(::testing::UnitTest::GetInstance()
                                        ->current_test_info()
                                        ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_config(const json& j, const std::string& name = "run.json") const {
    std::ofstream(path(name)) << j.dump(2);
    return path(name);
  }

  int invoke(const std::string& args) const {
    const std::string cmd = std::string(ZS_CLI_PATH) + " " + args + " 2>" +
                            path("stderr.txt") + " >" + path("stdout.txt");
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
  }

  fs::path dir_;
};

json small_grid(const std::string& out) {
  return {{"seed", 42},
          {"out", out},
          {"grid",
           {{"a0", {{"min", 0.0}, {"max", 2.0}, {"count", 3}}},
            {"zeta", {0.0, 0.5, 1.0}},
            {"n_traj", 8},
            {"flow", {{"k_max", 30}}}}}};
}

TEST_F(CliTest, GridCsvHeader) {
  const std::string out = path("grid.csv");
  ASSERT_EQ(invoke("--config " + write_config(small_grid(out))), 0) << slurp(path("stderr.txt"));
  const std::string csv = slurp(out);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "a0,zeta,P0,P1,P2,P3,mean_fpt,censored_fraction");
  int rows = 0;
  for (char c : csv) rows += c == '\n';
  EXPECT_EQ(rows, 1 + 9);
  EXPECT_TRUE(fs::exists(out + ".boundary.csv"));
  EXPECT_TRUE(fs::exists(out + ".manifest.json"));
  EXPECT_FALSE(fs::exists(out + ".failed"));
}

TEST_F(CliTest, SchurWithoutCouplingEchoesSlowBlock) {
  const std::string out = path("q.json");
  const json cfg = {{"out", out},
                    {"format", "json"},
                    {"schur",
                     {{"a", {{2.0, 0.5}, {0.5, -1.0}}},
                      {"b", {{0.0}, {0.0}}},
                      {"c", {{3.0}}}}}};
  ASSERT_EQ(invoke("--config " + write_config(cfg)), 0) << slurp(path("stderr.txt"));
  const json res = json::parse(slurp(out));
  EXPECT_EQ(res["q_eff"], json({{2.0, 0.5}, {0.5, -1.0}}));
  EXPECT_EQ(res["signature"]["n_minus"], 1);
}

TEST_F(CliTest, ManifestRerunIsByteIdentical) {
  const std::string out = path("grid.csv");
  ASSERT_EQ(invoke("--config " + write_config(small_grid(out))), 0);
  const std::string first = slurp(out), first_curve = slurp(out + ".boundary.csv");
  const json manifest = json::parse(slurp(out + ".manifest.json"));
  EXPECT_EQ(manifest["seed"], 42);
  EXPECT_EQ(manifest["tool"], "zeno-schur");
  EXPECT_TRUE(manifest.contains("wall_time_s"));
  EXPECT_TRUE(manifest.contains("version"));

  fs::copy_file(out + ".manifest.json", path("replay.json"));
  fs::remove(out);
  ASSERT_EQ(invoke("--config " + path("replay.json")), 0) << slurp(path("stderr.txt"));
  EXPECT_EQ(slurp(out), first);
  EXPECT_EQ(slurp(out + ".boundary.csv"), first_curve);
}

TEST_F(CliTest, WorkerCountDoesNotChangeBytes) {
  const std::string cfg = write_config(small_grid(path("g.csv")));
  ASSERT_EQ(invoke("--config " + cfg + " --workers 1 --out " + path("w1.csv")), 0);
  ASSERT_EQ(invoke("--config " + cfg + " --workers 8 --out " + path("w8.csv")), 0);
  EXPECT_EQ(slurp(path("w1.csv")), slurp(path("w8.csv")));
  EXPECT_EQ(json::parse(slurp(path("w8.csv.manifest.json")))["workers"], 8);
}

TEST_F(CliTest, SeedOverrideChangesOutputAndIsRecorded) {
  const std::string cfg = write_config(small_grid(path("g.csv")));
  ASSERT_EQ(invoke("--config " + cfg + " --out " + path("a.csv")), 0);
  ASSERT_EQ(invoke("--config " + cfg + " --seed 18446744073709551615 --out " +
                   path("b.csv")),
            0);
  EXPECT_NE(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(json::parse(slurp(path("b.csv.manifest.json")))["seed"].get<std::uint64_t>(),
            18446744073709551615ULL);
}

TEST_F(CliTest, ModuleErrorWritesFailureMarkerOnly) {
  const std::string out = path("bad.json");
  const json cfg = {{"out", out},
                    {"reconstruct",
                     {{"mu", {{1.0, 0.0}, {0.0, 1.0}}},
                      {"q_eff", {{1.0, 0.0}, {0.0, -1.0}}},
                      {"n_samples", 100}}}};
  EXPECT_EQ(invoke("--config " + write_config(cfg)), 1);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_FALSE(fs::exists(out + ".manifest.json"));
  ASSERT_TRUE(fs::exists(out + ".failed"));
  EXPECT_NE(slurp(out + ".failed").find("UnstableDrift"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsNameTheField) {
  json cfg = small_grid(path("g.csv"));
  cfg["grid"]["flow"]["kmax"] = 3;
  EXPECT_EQ(invoke("--config " + write_config(cfg)), 2);
  EXPECT_NE(slurp(path("stderr.txt")).find("grid.flow.kmax"), std::string::npos);

  cfg = small_grid(path("g.csv"));
  cfg["flow"] = json::object();
  EXPECT_EQ(invoke("--config " + write_config(cfg)), 2);

  cfg = small_grid(path("g.csv"));
  cfg.erase("out");
  EXPECT_EQ(invoke("--config " + write_config(cfg)), 2);
  EXPECT_FALSE(fs::exists(path("g.csv")));
}

TEST_F(CliTest, FlowJsonLines) {
  const std::string out = path("flow.jsonl");
  const json cfg = {{"seed", 5},
                    {"out", out},
                    {"format", "json"},
                    {"flow", {{"zeta", 0.3}, {"a0", 0.5}, {"k_max", 20}, {"n_traj", 3}}}};
  ASSERT_EQ(invoke("--config " + write_config(cfg)), 0) << slurp(path("stderr.txt"));
  std::istringstream lines(slurp(out));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const json rec = json::parse(line);
    EXPECT_EQ(rec["steps"].size(), 21u);
    ++n;
  }
  EXPECT_EQ(n, 3);
}

TEST_F(CliTest, MinimalScanAndReconstruct) {
  const json scan_cfg = {{"out", path("scan.csv")},
                         {"minimal-scan",
                          {{"chi", {{"min", 0.0}, {"max", 2.0}, {"count", 11}}},
                           {"g", {0.5, 1.0, 2.0}}}}};
  ASSERT_EQ(invoke("--config " + write_config(scan_cfg)), 0) << slurp(path("stderr.txt"));
  EXPECT_EQ(slurp(path("scan.csv")).substr(0, 16), "chi,g,b_eff_fina");
  EXPECT_TRUE(fs::exists(path("scan.csv.contour.csv")));

  const json rec_cfg = {{"out", path("rec.json")},
                        {"format", "json"},
                        {"seed", 3},
                        {"reconstruct",
                         {{"mu", {{1.0, 0.0}, {0.0, 1.0}}},
                          {"q_eff", {{1.0, 0.0}, {0.0, 2.0}}},
                          {"n_samples", 20000}}}};
  ASSERT_EQ(invoke("--config " + write_config(rec_cfg)), 0) << slurp(path("stderr.txt"));
  const json rep = json::parse(slurp(path("rec.json")));
  EXPECT_LT(rep["relative_error"].get<double>(), 0.1);
}

TEST(ParseConfigTest, StrictSchema) {
  using zeno_schur::ConfigInvalid;
  using zeno_schur::cli::parse_config;
  const json ok = {{"out", "x"}, {"schur", {{"a", 1.0}, {"b", 0.0}, {"c", 1.0}}}};
  EXPECT_EQ(parse_config(ok).subcommand, "schur");
  json bad = ok;
  bad["extra"] = 1;
  EXPECT_THROW(parse_config(bad), ConfigInvalid);
  bad = ok;
  bad["seed"] = -1;
  EXPECT_THROW(parse_config(bad), ConfigInvalid);
  bad = ok;
  bad["format"] = "xml";
  EXPECT_THROW(parse_config(bad), ConfigInvalid);
  bad = ok;
  bad["schur"]["c"] = -1.0;
  EXPECT_NO_THROW(parse_config(bad));
  EXPECT_EQ(parse_config({{"seed", "123"}, {"out", "x"}, {"schur", ok["schur"]}}).seed, 123u);
}

}  // namespace
