#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cli/plot.hpp"
#include "cli/prior_file.hpp"
#include "mtd/autocorr.hpp"
#include "mtd/error.hpp"
#include "mtd/image_io.hpp"
#include "mtd/measurement_file.hpp"
#include "oracles/oracles.hpp"

namespace mtd {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("mtd_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Runs the tool with `args`, returns its exit code.
  int mtd(const std::string& args) {
    const std::string cmd = std::string(MTD_BINARY) + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_F(CliTest, SimulatePaperScaleManifest) {
  std::mt19937_64 rng(1);
  save_image(oracle::random_image(14, 14, rng), path("x.csv"));
  ASSERT_EQ(mtd("simulate --target " + path("x.csv") + " --N 4000 --subs 10 --gamma 0.1 --snr 1 --out " +
                path("sim")),
            0);
  const json m = cli::read_json(path("sim/manifest.json"));
  ASSERT_EQ(m["measurements"].size(), 10u);
  for (const json& e : m["measurements"]) {
    EXPECT_EQ(e["copies"].get<long>(), 8163);
    EXPECT_TRUE(fs::exists(dir_ / "sim" / e["file"].get<std::string>()));
    EXPECT_TRUE(fs::exists(dir_ / "sim" / e["plan"].get<std::string>()));
  }
  EXPECT_TRUE(fs::exists(dir_ / "sim" / "config.toml"));
}

TEST_F(CliTest, SimulateNoiselessHeaderAndPackingError) {
  save_image(Image(6, 6, 0.5), path("x.csv"));
  ASSERT_EQ(mtd("simulate --target " + path("x.csv") + " --N 128 --subs 1 --sigma2 0 --out " + path("sim")), 0);
  EXPECT_EQ(read_measurement_header(path("sim/sub_0.mtdmeas")).sigma2, 0.0);
  EXPECT_EQ(mtd("simulate --target " + path("x.csv") + " --N 128 --gamma 0.9 --snr 1 --out " + path("bad")), 2);
  EXPECT_FALSE(fs::exists(dir_ / "bad"));
  EXPECT_EQ(mtd("simulate --target " + path("x.csv") + " --out " + path("bad")), 2);  // neither snr nor sigma2
  EXPECT_EQ(mtd("simulate --target " + path("missing.csv") + " --snr 1 --out " + path("bad")), 4);
  EXPECT_EQ(mtd("no-such-command"), 2);
}

TEST_F(CliTest, MomentsOfSingleCopyAndDeterminism) {
  std::mt19937_64 rng(2);
  const Image x = oracle::random_image(5, 5, rng);
  save_image(x, path("x.csv"));
  // One sub-measurement, density low enough for a handful of copies.
  ASSERT_EQ(mtd("simulate --target " + path("x.csv") + " --N 64 --subs 1 --gamma 0.02 --sigma2 0 --out " +
                path("sim")),
            0);
  ASSERT_EQ(mtd("moments --manifest " + path("sim/manifest.json") + " --out " + path("a.mtdac")), 0);
  ASSERT_EQ(mtd("moments --manifest " + path("sim/manifest.json") + " --out " + path("b.mtdac")), 0);
  EXPECT_EQ(slurp(path("a.mtdac")), slurp(path("b.mtdac")));

  const json m = cli::read_json(path("sim/manifest.json"));
  AutocorrSet expected = autocorr_image(load_image(path("sim/low.csv")), 5);
  expected.scale(m["gamma"].get<double>());
  const AutocorrSet got = read_autocorr(path("a.mtdac"));
  // The measurement stores float32 pixels.
  EXPECT_LT(oracle::max_abs_diff(got, expected), 1e-7);
}

TEST_F(CliTest, MomentsPoolingMatchesManualAverage) {
  save_image(Image(4, 4, 0.5), path("x.csv"));
  ASSERT_EQ(mtd("simulate --target " + path("x.csv") + " --N 96 --subs 3 --snr 2 --out " + path("sim")), 0);
  ASSERT_EQ(mtd("moments --manifest " + path("sim/manifest.json") + " --out " + path("pooled.mtdac")), 0);
  AutocorrSet manual = AutocorrSet::zeros(4);
  for (int k = 0; k < 3; ++k) {
    const Measurement y = read_measurement(path("sim/sub_" + std::to_string(k) + ".mtdmeas"));
    manual.add_scaled(autocorr_measurement(y, 4), 1.0 / 3.0);
  }
  EXPECT_LT(oracle::max_abs_diff(read_autocorr(path("pooled.mtdac")), manual), 1e-10);

  std::ofstream(path("corrupt.mtdmeas"), std::ios::binary) << "MTDMEAS1garbage";
  EXPECT_EQ(mtd("moments --input " + path("corrupt.mtdmeas") + " --L 4 --out " + path("c.mtdac")), 4);
}

TEST_F(CliTest, RecoverWritesEstimateTraceAndError) {
  std::mt19937_64 rng(3);
  const Image x = oracle::random_image(4, 4, rng);
  save_image(x, path("x.csv"));
  ASSERT_EQ(mtd("simulate --target " + path("x.csv") + " --N 128 --subs 1 --sigma2 0 --out " + path("sim")), 0);
  ASSERT_EQ(mtd("moments --manifest " + path("sim/manifest.json") + " --out " + path("m.mtdac")), 0);
  const std::string common = "recover --moments " + path("m.mtdac") + " --manifest " + path("sim/manifest.json") +
                             " --truth " + path("x.csv") + " --momentum 0.9 --learning-rate 20 --iterations 50 ";
  ASSERT_EQ(mtd(common + "--out " + path("r0")), 0);
  for (const char* f : {"estimate.png", "estimate.csv", "loss_trace.csv", "result.json", "config.toml"}) {
    EXPECT_TRUE(fs::exists(dir_ / "r0" / f)) << f;
  }
  const json r0 = cli::read_json(path("r0/result.json"));
  EXPECT_EQ(r0["status"], "ok");
  EXPECT_NEAR(r0["E"].get<double>(), evaluate_error(load_image(path("r0/estimate.csv")), x), 1e-12);

  json gauss = {{"kind", "gaussian"}, {"side", 4}, {"mean", 0.5}, {"variance", 0.1}};
  cli::write_json(gauss, path("g.json"));
  ASSERT_EQ(mtd(common + "--prior gaussian --prior-file " + path("g.json") + " --out " + path("r1")), 0);
  // Resolved configs differ only in the prior fields and the output path.
  std::istringstream a(slurp(path("r0/config.toml"))), b(slurp(path("r1/config.toml")));
  std::string la, lb;
  int differing = 0;
  while (std::getline(a, la) && std::getline(b, lb)) {
    if (la != lb) {
      ++differing;
      EXPECT_TRUE(la.rfind("prior", 0) == 0 || la.rfind("out", 0) == 0) << la;
    }
  }
  EXPECT_EQ(differing, 3);

  // The resolved config re-runs the same recovery.
  ASSERT_EQ(mtd("--config " + path("r0/config.toml") + " recover --out " + path("r2")), 0);
  EXPECT_EQ(slurp(path("r0/estimate.csv")), slurp(path("r2/estimate.csv")));
}

TEST_F(CliTest, RecoverDivergenceExitsWithSnapshot) {
  std::mt19937_64 rng(4);
  save_image(oracle::random_image(4, 4, rng), path("x.csv"));
  ASSERT_EQ(mtd("simulate --target " + path("x.csv") + " --N 128 --subs 1 --sigma2 0 --out " + path("sim")), 0);
  ASSERT_EQ(mtd("moments --manifest " + path("sim/manifest.json") + " --out " + path("m.mtdac")), 0);
  EXPECT_EQ(mtd("recover --moments " + path("m.mtdac") + " --manifest " + path("sim/manifest.json") +
                " --learning-rate 1e12 --iterations 200 --out " + path("r")),
            3);
  EXPECT_TRUE(fs::exists(dir_ / "r" / "last_finite.csv"));
  EXPECT_EQ(cli::read_json(path("r/result.json"))["status"], "diverged");
}

TEST_F(CliTest, SweepPlotAndPanel) {
  ASSERT_EQ(mtd("make-gmm --side 4 --components 2 --samples 2 --out " + path("gmm")), 0);
  ASSERT_EQ(mtd("sweep --targets " + path("gmm/target_0.csv") + " " + path("gmm/target_1.csv") +
                " --snr 1,10 --N 64 --subs 1 --gamma 0.05 --restarts 1 --iterations 20 --momentum 0.9"
                " --learning-rate 10 --prior gmm --prior-file " +
                path("gmm/gmm.json") + " --out " + path("sweep")),
            0);
  const std::vector<SweepRow> rows = read_sweep_csv(path("sweep/sweep.csv"));
  EXPECT_EQ(rows.size(), 2u * 2u * 2u);
  ASSERT_EQ(mtd("plot --csv " + path("sweep/sweep.csv") + " --out " + path("fig.svg")), 0);
  const std::string svg = slurp(path("fig.svg"));
  std::size_t lines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  EXPECT_EQ(lines, 2u);

  std::ofstream(path("empty.csv")) << "snr,prior,target_id,restart,final_loss,error_E,wall_ms\n";
  EXPECT_EQ(mtd("plot --csv " + path("empty.csv") + " --out " + path("empty.svg")), 4);
  EXPECT_FALSE(fs::exists(dir_ / "empty.svg"));

  ASSERT_EQ(mtd("panel --row " + path("gmm/target_0.csv") + "," + path("gmm/target_1.csv") + " --row " +
                path("gmm/target_1.csv") + " --cell 8 --out " + path("panel.png")),
            0);
  const Image panel = read_raster(path("panel.png"));
  EXPECT_EQ(panel.width(), 2 * (8 + 2) + 2);
  EXPECT_EQ(panel.height(), 2 * (8 + 2) + 2);
}

TEST(PriorFile, JsonRoundTripAndErrors) {
  const GmmPrior gmm = cli::make_blob_gmm(5, 3, 0.01, 7);
  const GmmPrior back = cli::gmm_from_json(cli::to_json(gmm));
  ASSERT_EQ(back.components().size(), 3u);
  std::mt19937_64 rng(1);
  const Image x = oracle::random_image(5, 5, rng);
  EXPECT_LT(frobenius_norm(back.score(x) - gmm.score(x)), 1e-12);
  EXPECT_THROW(cli::gmm_from_json(json{{"kind", "gaussian"}}), FormatError);
  EXPECT_THROW(cli::gmm_from_json(json{{"kind", "gmm"}, {"side", 2}, {"components", {{{"weight", 1}}}}}),
               FormatError);
  const GaussianPrior g = cli::gaussian_from_json(json{{"kind", "gaussian"}, {"side", 2}, {"mean", {0, 1, 2, 3}},
                                                       {"variance", 2.0}});
  EXPECT_EQ(g.mean()[3], 3.0);
  EXPECT_THROW(cli::parse_prior_kind("flow"), ConfigError);
  EXPECT_EQ(cli::load_prior(cli::PriorKind::kNone, {}, 4)->kind(), "zero");
}

}  // namespace
}  // namespace mtd
