#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "sonarsnoop/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = sonarsnoop::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sonarsnoop_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

TEST_F(CliTest, GenWritesOneSecondOfWholeFrames) {
  const auto r = run({"gen", "-o", path("s.wav"), "--duration", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto w = sonarsnoop::read_wav(path("s.wav"));
  EXPECT_EQ(w.sample_rate, 48000);
  ASSERT_EQ(w.channels.size(), 1u);
  EXPECT_EQ(w.channels[0].size(), 181u * 264u);
}

TEST_F(CliTest, GenRejectsZeroFrames) {
  EXPECT_EQ(run({"gen", "-o", path("s.wav"), "--frames", "0"}).code, 2);
}

TEST_F(CliTest, MissingSubcommandIsUsageError) { EXPECT_EQ(run({}).code, 2); }

TEST_F(CliTest, EnumeratePrintsTotal) {
  const auto r = run({"enumerate"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("total: 389112"), std::string::npos);
  const auto j = run({"enumerate", "--json", "--min", "4", "--max", "4"});
  ASSERT_EQ(j.code, 0);
  EXPECT_EQ(json::parse(j.out)["total"], 1624);
}

TEST_F(CliTest, EnumerateExportsTablesAndCatalog) {
  ASSERT_EQ(run({"enumerate", "--tables", path("t.json"), "--catalog", path("c.txt")}).code, 0);
  EXPECT_FALSE(json::parse(slurp(path("t.json"))).empty());
  const std::string cat = slurp(path("c.txt"));
  EXPECT_NE(cat.find("1: 0 1 2 5 8"), std::string::npos);
  EXPECT_NE(cat.find("# 15: "), std::string::npos);
}

TEST_F(CliTest, UnknownConfigKeyIsRuntimeError) {
  const auto r = run({"enumerate", "--catalog", "-", "--set", "no.such.key=1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("no.such.key"), std::string::npos);
}

TEST_F(CliTest, ConfigFileIsOverriddenByFlags) {
  {
    std::ofstream f(path("run.cfg"));
    f << "# test\nseed = 5\nsim.snr_db = none\n";
  }
  const auto r = run({"analyze", "-c", path("run.cfg"), "--seed", "9", "--simulate", "5", "-m", "D2.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["seed"], 9);
}

TEST_F(CliTest, AnalyzeSimulatedPatternFindsTruth) {
  const auto r = run({"analyze", "--simulate", "5", "-m", "D2.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["bottom"]["signature"], "T-A");
  EXPECT_EQ(j["top"]["signature"], "A-A");
  EXPECT_TRUE(j["truth"]["hit"].get<bool>());
  std::vector<int> ids;
  for (const auto& c : j["decision"]["candidates"]) ids.push_back(c["pattern"]);
  EXPECT_EQ(ids, (std::vector<int>{2, 5, 11}));
}

TEST_F(CliTest, SimulateThenAnalyzeFromFiles) {
  ASSERT_EQ(run({"simulate", "-p", "7", "-o", path("st.wav"), "--bottom-out", path("b.wav"), "--top-out",
                 path("t.wav"), "--truth-out", path("truth.json")})
                .code,
            0);
  const auto st = sonarsnoop::read_wav(path("st.wav"));
  EXPECT_EQ(st.channels.size(), 2u);
  const auto truth = json::parse(slurp(path("truth.json")));
  EXPECT_EQ(truth["bottom_signature"], "A-T");
  EXPECT_EQ(truth["top_signature"], "A-T");

  const auto stereo = run({"analyze", "--wav", path("st.wav"), "-m", "D2.1"});
  ASSERT_EQ(stereo.code, 0) << stereo.err;
  const auto split = run({"analyze", "--bottom", path("b.wav"), "--top", path("t.wav"), "-m", "D2.1"});
  ASSERT_EQ(split.code, 0) << split.err;
  EXPECT_EQ(json::parse(stereo.out)["decision"], json::parse(split.out)["decision"]);
}

TEST_F(CliTest, SingleMicModesNeedOnlyThatMic) {
  ASSERT_EQ(run({"simulate", "-p", "1", "--bottom-out", path("b.wav")}).code, 0);
  const auto ok = run({"analyze", "--bottom", path("b.wav"), "-m", "D2.3"});
  EXPECT_EQ(ok.code, 0) << ok.err;
  const auto missing = run({"analyze", "--bottom", path("b.wav"), "-m", "D2.1"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("top"), std::string::npos);
}

TEST_F(CliTest, MismatchedTraceLengthsFail) {
  ASSERT_EQ(run({"gen", "-o", path("a.wav"), "--frames", "200"}).code, 0);
  ASSERT_EQ(run({"gen", "-o", path("b.wav"), "--frames", "220"}).code, 0);
  EXPECT_EQ(run({"analyze", "--bottom", path("a.wav"), "--top", path("b.wav"), "-m", "D2.1"}).code, 1);
}

TEST_F(CliTest, D1WithoutModelsIsUsageError) {
  EXPECT_EQ(run({"analyze", "--simulate", "1", "-m", "D1.1"}).code, 2);
}

TEST_F(CliTest, ExclusiveTraceSourcesRejected) {
  ASSERT_EQ(run({"gen", "-o", path("a.wav"), "--frames", "200"}).code, 0);
  EXPECT_EQ(run({"analyze", "--wav", path("a.wav"), "--simulate", "1"}).code, 2);
  EXPECT_EQ(run({"analyze"}).code, 2);
}

TEST_F(CliTest, AnalyzeWritesCsvExports) {
  ASSERT_EQ(run({"analyze", "--simulate", "3", "-m", "D2.1", "-o", path("r.json"), "--features-csv",
                 path("f.csv"), "--components-csv", path("c.csv")})
                .code,
            0);
  EXPECT_TRUE(fs::exists(path("r.json")));
  const std::string f = slurp(path("f.csv"));
  EXPECT_GT(std::count(f.begin(), f.end(), '\n'), 1);
  EXPECT_GT(fs::file_size(path("c.csv")), 0u);
}

TEST_F(CliTest, ExperimentWithSinglePatternCatalogHasOneCandidate) {
  {
    std::ofstream f(path("one.txt"));
    f << "4: 0 1 2 4 6\n";
  }
  const auto r = run({"experiment", "-m", "D2.1", "--users", "1", "--reps", "2", "--threads", "1", "--set",
                      "catalog.path=" + path("one.txt"), "-o", path("rep.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(path("rep.json")));
  EXPECT_DOUBLE_EQ(j["metrics"]["D2.1"]["m2_mean_candidates"].get<double>(), 1.0);
}

TEST_F(CliTest, ExperimentReportIsReproducible) {
  const std::vector<std::string> base = {"experiment", "-m",   "D2.1", "-m",       "D2.3",        "--users",
                                         "2",          "--reps", "1",  "--seed",   "11",          "--snr",
                                         "20",         "--threads", "2"};
  auto a = base, b = base;
  a.insert(a.end(), {"-o", path("a.json")});
  b.insert(b.end(), {"-o", path("b.json")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  const std::string ja = slurp(path("a.json"));
  EXPECT_EQ(ja, slurp(path("b.json")));
  const auto j = json::parse(ja);
  EXPECT_EQ(j["seed"], 11);
  EXPECT_EQ(j["config"]["sim.snr_db"], "20");
}

TEST_F(CliTest, EvalRequiresModels) {
  EXPECT_EQ(run({"eval", "-m", "D2.1", "--users", "1", "--reps", "1"}).code, 2);
}

TEST_F(CliTest, RenderWritesImages) {
  const auto r = run({"render", "--simulate", "6", "-o", path("img"), "--stage", "all", "--csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* mic : {"bottom", "top"})
    for (const char* stage : {"profile", "diff", "binary", "components", "overlay"}) {
      const std::string p = path(std::string("img/") + mic + "_" + stage + ".pgm");
      ASSERT_TRUE(fs::exists(p)) << p;
      EXPECT_EQ(slurp(p).substr(0, 2), "P5");
    }
  EXPECT_TRUE(fs::exists(path("img/bottom_diff.csv")));
}

TEST_F(CliTest, RenderRejectsUnknownStage) {
  EXPECT_EQ(run({"render", "--simulate", "6", "-o", path("img"), "--stage", "edges"}).code, 2);
}

}  // namespace
