#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "maskbench/cli.hpp"
#include "maskbench/io.hpp"
#include "maskbench/wav.hpp"
#include "support/corpus.hpp"
#include "support/signals.hpp"

using namespace maskbench;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) v.push_back(line);
  return v;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("maskbench_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST(Cli, UnknownVerbIsUsageError) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, NoVerbAndBadFlagsAreUsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"mask-curve", "--mask", "gaussian"}).code, 2);
  EXPECT_EQ(run({"mask-curve", "--bogus"}).code, 2);
  EXPECT_EQ(run({"verify-optimum", "--tol", "abc"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, MaskCurveWiener) {
  const auto r = run({"mask-curve", "--mask", "wiener", "--range", "-60:60:1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 122u);  // header + 121
  EXPECT_EQ(rows[0], "xi_db\tgain");
  EXPECT_EQ(rows[61], "0\t0.5");
}

TEST(Cli, MaskCurveDbAwareFlags) {
  const auto r = run({"mask-curve", "--mask", "cm", "--gamma", "2", "--mu", "5dB", "--range", "0:10:5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out)[2], "5\t0.5");
  EXPECT_EQ(run({"mask-curve", "--mask", "cm", "--mu", "loud"}).code, 1);
  EXPECT_EQ(run({"mask-curve", "--range", "5:1:1"}).code, 1);
}

TEST(Cli, VerifyOptimum) {
  const auto r = run({"verify-optimum", "--tol", "1e-6"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 316u);
  EXPECT_EQ(rows[0], "xi_db,rho,alpha,h_closed,h_numeric,abs_dev,pass");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].back(), '1') << rows[i];
  EXPECT_EQ(run({"verify-optimum", "--tol", "1e-30"}).code, 1);
}

TEST(Cli, MorphologyVerbs) {
  auto r = run({"morphology", "rmse", "--a", "wiener", "--b", "wiener"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0\n");
  r = run({"morphology", "rmse", "--a", "cm:gamma=100,mu=0dB", "--b", "binary:mu0=0dB", "--range", "-60:60:0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GT(std::stod(r.out), 0.0);
  r = run({"morphology", "fit", "--target", "cm:gamma=1,mu=1", "--range", "-60:60:0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fit = lines(r.out);
  ASSERT_EQ(fit.size(), 2u);
  EXPECT_EQ(fit[1].substr(0, 12), "cm,1,0,pw,1,");
  r = run({"morphology", "curves", "--spec", "wiener", "--spec", "binary", "--range", "-1:1:1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "xi_db\twiener\tbinary\n-1\t0.442688366238\t0\n0\t0.5\t1\n1\t0.557311633762\t1\n");
  EXPECT_EQ(run({"morphology"}).code, 2);
  EXPECT_EQ(run({"morphology", "fit", "--target", "wiener"}).code, 1);
}

TEST(Cli, GridListing) {
  auto r = run({"grid", "--family", "cm"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 301u);
  r = run({"grid", "--family", "pw", "--jobs", "2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 251u);
  EXPECT_EQ(run({"grid", "--fit-cm"}).code, 1);
}

TEST(Cli, StftCheck) {
  const auto r = run({"stft-check", "--seconds", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GE(std::stod(r.out.substr(r.out.find('=') + 1)), 60.0);
}

TEST_F(CliTest, MixEnhanceAndMetrics) {
  wav::write(path("s.wav"), testsig::speech(1.0, 91), wav::SampleFormat::kFloat32);
  wav::write(path("n.wav"), testsig::rumble(3.0, 92), wav::SampleFormat::kFloat32);
  auto r = run({"mix", "--speech", path("s.wav"), "--noise", path("n.wav"), "--snr", "0", "--seed", "4", "--out",
                path("y.wav"), "--noise-out", path("v.wav")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto y = wav::read(path("y.wav"));

  r = run({"enhance", "--in", path("y.wav"), "--clean", path("s.wav"), "--noise", path("v.wav"), "--mask", "cm",
           "--gamma", "2", "--mu", "0dB", "--out", path("oracle.wav"), "--mask-out", path("mask.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(wav::read(path("oracle.wav")).size(), y.size());
  EXPECT_TRUE(fs::exists(path("mask.tsv")));

  r = run({"enhance", "--in", path("y.wav"), "--mask", "wiener", "--out", path("dd.wav"), "--format", "pcm16"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(wav::read(path("dd.wav")).size(), y.size());

  r = run({"metrics", "ncm", "--clean", path("s.wav"), "--proc", path("oracle.wav")});
  ASSERT_EQ(r.code, 0) << r.err;
  const double oracle_ncm = std::stod(r.out);
  r = run({"metrics", "ncm", "--clean", path("s.wav"), "--proc", path("y.wav"), "--quality", "2.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const double noisy_ncm = std::stod(r.out);
  EXPECT_GT(oracle_ncm, noisy_ncm);
  EXPECT_EQ(lines(r.out)[0].find(",2.5,"), r.out.find(','));

  write_file_atomic(dir_ / "batch.json",
                    R"({"entries": [{"id": "a", "clean_path": "s.wav", "processed_path": "oracle.wav"},
                                    {"id": "b", "clean_path": "s.wav", "processed_path": "y.wav"}]})");
  write_file_atomic(dir_ / "q.csv", "id,score\na,3\n");
  r = run({"metrics", "batch", "--manifest", path("batch.json"), "--quality-csv", path("q.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "id,ncm,quality,d_p");
  EXPECT_EQ(rows[2].back(), ',');  // no quality for b, so no d_p

  EXPECT_EQ(run({"enhance", "--in", path("y.wav"), "--clean", path("s.wav"), "--out", path("x.wav")}).code, 1);
  EXPECT_EQ(run({"enhance", "--in", path("missing.wav"), "--out", path("x.wav")}).code, 1);
  EXPECT_EQ(run({"enhance", "--in", path("y.wav"), "--mask", "cm", "--gamma", "0.3", "--out", path("x.wav")}).code, 1);
  EXPECT_EQ(run({"enhance", "--out", path("x.wav")}).code, 2);
}

TEST_F(CliTest, ExperimentIsByteIdenticalAcrossRuns) {
  const auto corpus = testsig::make_toy_corpus(dir_ / "corpus", 6, 0.4, 3);
  write_file_atomic(dir_ / "plan.json", R"({"snr_levels_db": [0], "noises": ["rumble"], "mask_family": "cm",
      "split": {"train_count": 3, "test_count": 3}, "seed": 5})");
  const std::vector<std::string> base = {"experiment", "--plan", path("plan.json"), "--manifest", corpus.manifest.string()};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("run1"), "--jobs", "1"});
  b.insert(b.end(), {"--out", path("run2"), "--jobs", "2"});
  const auto r1 = run(a), r2 = run(b);
  ASSERT_EQ(r1.code, 0) << r1.err;
  ASSERT_EQ(r2.code, 0) << r2.err;
  for (const char* f : {"params.csv", "scores.csv", "trials.csv", "split.csv", "run_info.json", "boxplot/rumble_snr0.tsv"}) {
    EXPECT_EQ(read_file(dir_ / "run1" / f), read_file(dir_ / "run2" / f)) << f;
  }
  EXPECT_EQ(run({"experiment", "--plan", path("missing.json"), "--manifest", corpus.manifest.string(), "--out", path("r")}).code, 1);
}
