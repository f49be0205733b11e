#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mtd/error.hpp"
#include "mtd/measurement_file.hpp"
#include "oracles/oracles.hpp"

namespace mtd {
namespace {

namespace fs = std::filesystem;

class MeasurementFileTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mtd_meas_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST_F(MeasurementFileTest, RoundTripMatchesFloatValues) {
  std::mt19937_64 rng(4);
  const Image x = oracle::random_image(6, 6, rng);
  const PlacementPlan plan = plan_placements(300, 6, 0.1, 9);
  SyntheticSource source(x, plan, NoiseModel{0.25, 5});
  const fs::path path = dir_ / "y.mtdmeas";
  write_measurement(path, source, 37);  // strip size that does not divide N

  EXPECT_EQ(fs::file_size(path), kMeasurementHeaderBytes + 300u * 300u * 4u);
  const MeasurementHeader header = read_measurement_header(path);
  EXPECT_EQ(header.N, 300);
  EXPECT_EQ(header.sigma2, 0.25);
  EXPECT_EQ(header.copies, plan.count());

  const Measurement dense = synthesize(x, plan, NoiseModel{0.25, 5});
  const Measurement loaded = read_measurement(path);
  ASSERT_EQ(loaded.data.size(), dense.data.size());
  for (std::size_t i = 0; i < dense.data.size(); ++i)
    ASSERT_EQ(loaded.data[i], static_cast<double>(static_cast<float>(dense.data[i])));
}

TEST_F(MeasurementFileTest, FileSourceRegionsMatchLoadedFrame) {
  const PlacementPlan plan = plan_placements(128, 4, 0.1, 2);
  SyntheticSource source(Image(4, 4, 1.0), plan, NoiseModel{1.0, 3});
  const fs::path path = dir_ / "y.mtdmeas";
  write_measurement(path, source);
  const Measurement loaded = read_measurement(path);
  FileSource file(path);
  EXPECT_EQ(file.size(), 128);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int r0 = static_cast<int>(rng() % 150) - 10;
    const int c0 = static_cast<int>(rng() % 150) - 10;
    const int h = 1 + static_cast<int>(rng() % 40), w = 1 + static_cast<int>(rng() % 40);
    std::vector<double> region(static_cast<std::size_t>(h) * w);
    file.read_region(r0, c0, h, w, region);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const int y = r0 + r, xx = c0 + c;
        const double expected = (y >= 0 && y < 128 && xx >= 0 && xx < 128) ? loaded.at(y, xx) : 0.0;
        ASSERT_EQ(region[static_cast<std::size_t>(r) * w + c], expected);
      }
  }
}

TEST_F(MeasurementFileTest, TruncatedAndBadMagic) {
  const PlacementPlan plan = plan_placements(64, 4, 0.05, 1);
  SyntheticSource source(Image(4, 4, 1.0), plan, NoiseModel{});
  const fs::path path = dir_ / "y.mtdmeas";
  write_measurement(path, source);
  fs::resize_file(path, fs::file_size(path) - 3);
  EXPECT_THROW(read_measurement(path), LengthError);
  fs::resize_file(path, 12);
  EXPECT_THROW(read_measurement_header(path), LengthError);

  {
    std::ofstream out(dir_ / "bad.mtdmeas", std::ios::binary);
    out << "NOTMEAS1" << std::string(24, '\0');
  }
  EXPECT_THROW(read_measurement(dir_ / "bad.mtdmeas"), FormatError);
  EXPECT_THROW(read_measurement(dir_ / "missing.mtdmeas"), IoError);
}

TEST_F(MeasurementFileTest, PlanCsvRoundTrip) {
  const PlacementPlan plan = plan_placements(200, 5, 0.1, 6);
  write_plan_csv(dir_ / "plan.csv", plan);
  const PlacementPlan back = read_plan_csv(dir_ / "plan.csv", 200, 5);
  EXPECT_EQ(back.origins, plan.origins);
  {
    std::ofstream out(dir_ / "broken.csv");
    out << "m,row,col\n0,10,abc\n";
  }
  EXPECT_THROW(read_plan_csv(dir_ / "broken.csv", 200, 5), FormatError);
}

}  // namespace
}  // namespace mtd
