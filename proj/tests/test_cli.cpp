#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "greyshill/io.hpp"
#include "greyshill/serialization.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("greyshill_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout and stderr merged into one capture file.
  CliResult run(const std::string& args, const std::string& env = "") {
    const auto capture = dir_ / "capture.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string("\"") + GREYSHILL_CLI + "\" " + args +
                            " > \"" + capture.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(capture);
    return r;
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path genuine(std::size_t users = 120) {
    const auto p = path("genuine.csv");
    const auto r = run("ingest --synthetic --users " + std::to_string(users) +
                       " --items 300 --mean-activity 20 --seed 3 --out " + p.string());
    EXPECT_EQ(r.code, 0) << r.out;
    return p;
  }

  fs::path dir_;
};

TEST_F(Cli, HelpListsSubcommandsAndDefaults) {
  auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"ingest", "attack", "features", "detect", "eval", "sweep", "replay"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  r = run("attack --help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--filler-size"), std::string::npos);
  EXPECT_NE(r.out.find("0.05"), std::string::npos);
  EXPECT_NE(r.out.find("GREYSHILL_ATTACK_SIZE"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("attack --in x.csv").code, 1);
  EXPECT_EQ(run("attack --in x.csv --out y.csv --model nonsense").code, 1);
  EXPECT_EQ(run("ingest --out " + path("a.csv").string()).code, 1);
}

TEST_F(Cli, DataErrorsExitWithTwo) {
  auto r = run("detect --in " + path("missing.csv").string() + " --out " + path("r.json").string());
  EXPECT_EQ(r.code, 2) << r.out;
  std::ofstream(path("bad.csv")) << "user_id,item_id,rating\nu,i,99\n";
  r = run("detect --in " + path("bad.csv").string() + " --out " + path("r.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("line 2"), std::string::npos) << r.out;
  r = run("sweep --config '{not json' --out " + path("s.csv").string());
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, AttackWritesLabelsAndManifest) {
  const auto g = genuine();
  const auto r = run("attack --in " + g.string() + " --model average --intent grey --grey-rating 3 --attack-size 0.17 --filler-size 0.05 --seed 4 --out " +
                     path("att/attacked.csv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto labels = greyshill::load_labels(path("att/labels.csv").string());
  EXPECT_EQ(labels.attackers.size(), 20u);  // round(0.17 * 120)
  EXPECT_EQ(labels.genuine.size(), 120u);
  const auto man = greyshill::Json::parse(slurp(path("att/manifest.json")));
  EXPECT_EQ(man["subcommand"], "attack");
  EXPECT_EQ(man["seeds"]["attack"], 4);
  EXPECT_EQ(man["inputs"].size(), 1u);
  EXPECT_EQ(man["outputs"].size(), 2u);
}

TEST_F(Cli, ConfigFileAndFlagOverride) {
  const auto g = genuine();
  std::ofstream(path("spec.json")) << R"({"model":"average","intent":"grey","grey_rating":5,"attack_size":0.1,"seed":9})";
  const auto r = run("attack --in " + g.string() + " --config " + path("spec.json").string() +
                     " --attack-size 0.25 --out " + path("a/attacked.csv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto man = greyshill::Json::parse(slurp(path("a/manifest.json")));
  EXPECT_EQ(man["attack"]["intent"], "grey");
  EXPECT_EQ(man["attack"]["grey_rating"], 5);
  EXPECT_DOUBLE_EQ(man["attack"]["attack_size"].get<double>(), 0.25);
  EXPECT_EQ(greyshill::load_labels(path("a/labels.csv").string()).attackers.size(), 30u);
}

TEST_F(Cli, EnvironmentSuppliesFlags) {
  const auto g = genuine();
  const auto r = run("attack --in " + g.string() + " --out " + path("e/attacked.csv").string(),
                     "GREYSHILL_ATTACK_SIZE=0.05 GREYSHILL_MODEL=bandwagon-random GREYSHILL_POPULAR_THRESHOLD=10");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(greyshill::load_labels(path("e/labels.csv").string()).attackers.size(), 6u);
  const auto man = greyshill::Json::parse(slurp(path("e/manifest.json")));
  EXPECT_EQ(man["attack"]["model"], "bandwagon-random");
}

TEST_F(Cli, DetectIsByteIdentical) {
  const auto g = genuine();
  ASSERT_EQ(run("attack --in " + g.string() + " --attack-size 0.17 --seed 2 --out " + path("x/a.csv").string()).code, 0);
  const auto a = path("x/a.csv").string();
  ASSERT_EQ(run("detect --in " + a + " --seed 11 --out " + path("d1/report.json").string()).code, 0);
  ASSERT_EQ(run("detect --in " + a + " --seed 11 --out " + path("d2/report.json").string()).code, 0);
  EXPECT_EQ(slurp(path("d1/report.json")), slurp(path("d2/report.json")));
  EXPECT_EQ(slurp(path("d1/flagged.csv")), slurp(path("d2/flagged.csv")));

  const auto r = run("eval --report " + path("d1/report.json").string() + " --labels " + path("x/labels.csv").string() +
                     " --out " + path("m/metrics.json").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto m = greyshill::Json::parse(slurp(path("m/metrics.json")));
  EXPECT_GE(m["detection_rate"].get<double>(), 0.0);
  EXPECT_LE(m["detection_rate"].get<double>(), 1.0);
  EXPECT_EQ(m["attackers"], 20);
}

TEST_F(Cli, FeaturesCsvHasThreeRowsPerUser) {
  const auto g = genuine(40);
  ASSERT_EQ(run("features --in " + g.string() + " --wavelet db2 --out " + path("f.csv").string()).code, 0);
  std::ifstream in(path("f.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1 + 3 * 40u);
}

TEST_F(Cli, EvalPredictionShift) {
  const auto g = genuine();
  const auto r = run("eval --genuine " + g.string() +
                     R"( --attack-config '{"model":"average","intent":"grey","grey_rating":5,"attack_size":0.2,"popular_threshold":10}')" +
                     " --seed 5 --out " + path("p/metrics.json").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto m = greyshill::Json::parse(slurp(path("p/metrics.json")))["prediction_shift"];
  EXPECT_GT(m["test_pairs"].get<std::size_t>(), 0u);
  EXPECT_GE(m["rmse"].get<double>(), m["mae"].get<double>());
  EXPECT_GE(m["baseline_rmse"].get<double>(), m["baseline_mae"].get<double>());
}

TEST_F(Cli, ReplayReproducesOutputs) {
  const auto g = genuine();
  ASSERT_EQ(run("attack --in " + g.string() + " --model aop --intent push --seed 8 --out " + path("r/a.csv").string()).code,
            0);
  const auto first = slurp(path("r/a.csv"));
  fs::remove(path("r/a.csv"));
  const auto r = run("replay --manifest " + path("r/manifest.json").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(slurp(path("r/a.csv")), first);
}

TEST_F(Cli, SmallSweepAndResume) {
  const std::string cfg =
      R"('{"dataset":{"synthetic":{"users":150,"items":300,"mean_activity":20}},"sample_users":80,)"
      R"("models":["average","random"],"intents":[{"intent":"nuke"}],"attack_sizes":[0.1],"filler_sizes":[0.05],)"
      R"("repetitions":1,"popular_threshold":10,"prediction_shift":false}')";
  auto r = run("sweep --config " + cfg + " --out " + path("s/metrics.csv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(path("s/metrics.csv"));
  const auto rows = greyshill::read_metric_csv(in);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) EXPECT_TRUE(row.error.empty()) << row.error;
  EXPECT_FALSE(fs::exists(path("s/metrics.csv.partial")));

  // A leftover partial file with one finished row is resumed, not recomputed.
  {
    std::ofstream part(path("s2.csv.partial"));
    part << greyshill::kMetricCsvHeader << '\n';
    auto fake = rows[0];
    fake.detection_rate = 0.123;
    greyshill::write_metric_row(fake, part);
  }
  r = run("sweep --config " + cfg + " --out " + path("s2.csv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("resuming with 1"), std::string::npos) << r.out;
  std::ifstream in2(path("s2.csv"));
  const auto resumed = greyshill::read_metric_csv(in2);
  ASSERT_EQ(resumed.size(), 2u);
  EXPECT_DOUBLE_EQ(resumed[0].detection_rate, 0.123);
  EXPECT_EQ(greyshill::Json::parse(slurp(path("manifest.json")))["rows"], 2);
}

}  // namespace
