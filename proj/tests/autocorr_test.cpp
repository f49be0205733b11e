#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mtd/autocorr.hpp"
#include "mtd/error.hpp"
#include "oracles/oracles.hpp"

namespace mtd {
namespace {

TEST(AutocorrImage, DeltaImage) {
  Image z(2, 2, 0.0);
  z.at(0, 0) = 1.0;
  const AutocorrSet a = autocorr_image(z, 2);
  EXPECT_EQ(a.a1, 0.25);
  EXPECT_EQ(a.a2, (std::vector<double>{0.25, 0.0, 0.0, 0.0}));
  EXPECT_EQ(a.third(0, 0), 0.25);
  for (int s1 = 0; s1 < 4; ++s1)
    for (int s2 = 0; s2 < 4; ++s2)
      if (s1 || s2) EXPECT_EQ(a.third(s1, s2), 0.0);
}

TEST(AutocorrImage, AllOnesSingleShift) {
  const AutocorrSet a = autocorr_image(Image(3, 3, 1.0), 1);
  EXPECT_EQ(a.a1, 1.0);
  EXPECT_EQ(a.a2, std::vector<double>{1.0});
  EXPECT_EQ(a.a3, std::vector<double>{1.0});
}

TEST(AutocorrImage, AllOnesShiftCounts) {
  // Shift (dr, dc) pairs (n - dr)(n - dc) pixels on an n x n support.
  const AutocorrSet a = autocorr_image(Image(4, 4, 1.0), 4);
  for (int dr = 0; dr < 4; ++dr)
    for (int dc = 0; dc < 4; ++dc) EXPECT_DOUBLE_EQ(a.a2[dr * 4 + dc], (4.0 - dr) * (4.0 - dc) / 16.0);
}

TEST(AutocorrImage, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    const int L = 1 + static_cast<int>(rng() % n);
    const Image z = oracle::random_image(n, n, rng, -1.0, 1.0);
    EXPECT_LT(oracle::max_abs_diff(autocorr_image(z, L), oracle::brute_autocorr(z, L)), 1e-12);
  }
}

TEST(AutocorrImage, ThirdOrderSymmetry) {
  std::mt19937_64 rng(5);
  const AutocorrSet a = autocorr_image(oracle::random_image(7, 7, rng), 5);
  for (int s1 = 0; s1 < 25; ++s1)
    for (int s2 = 0; s2 < 25; ++s2) EXPECT_EQ(a.third(s1, s2), a.third(s2, s1));
}

TEST(AutocorrImage, HomogeneousScaling) {
  std::mt19937_64 rng(6);
  const Image z = oracle::random_image(6, 6, rng);
  const double c = 1.7;
  const AutocorrSet a = autocorr_image(z, 4);
  const AutocorrSet b = autocorr_image(c * z, 4);
  EXPECT_NEAR(b.a1, c * a.a1, 1e-13);
  for (std::size_t i = 0; i < a.a2.size(); ++i) EXPECT_NEAR(b.a2[i], c * c * a.a2[i], 1e-13);
  for (std::size_t i = 0; i < a.a3.size(); ++i) EXPECT_NEAR(b.a3[i], c * c * c * a.a3[i], 1e-13);
}

TEST(AutocorrMeasurement, SingleCopyEqualsScaledImageMoments) {
  std::mt19937_64 rng(7);
  const int L = 5;
  const Image x = oracle::random_image(L, L, rng);
  const PlacementPlan plan{40, L, {{10, 20}}};
  const AutocorrSet ay = autocorr_measurement(synthesize(x, plan, NoiseModel{}), L);
  AutocorrSet expected = autocorr_image(x, L);
  expected.scale(double(L * L) / (40.0 * 40.0));
  EXPECT_LT(oracle::max_abs_diff(ay, expected), 1e-15);
  EXPECT_EQ(ay.norm_area, 1600.0);
}

TEST(AutocorrMeasurement, TiledMatchesUntiledAndBruteForce) {
  std::mt19937_64 rng(8);
  const int L = 4;
  const Image x = oracle::random_image(L, L, rng);
  const PlacementPlan plan = plan_placements(256, L, 0.1, 3);
  const Measurement y = synthesize(x, plan, NoiseModel{0.5, 4});
  const AutocorrSet whole = autocorr_measurement(y, L, EngineOptions{256, 1});
  Image frame(256, 256, y.data);
  EXPECT_LT(oracle::max_abs_diff(whole, oracle::brute_autocorr(frame, L)), 1e-12);
  for (int tile : {L, 7, 64, 100, 255}) {
    for (int threads : {1, 3}) {
      const AutocorrSet tiled = autocorr_measurement(y, L, EngineOptions{tile, threads});
      EXPECT_LT(oracle::max_abs_diff(tiled, whole), 1e-10) << "tile " << tile;
    }
  }
}

TEST(AutocorrMeasurement, BitwiseStableAcrossThreadCounts) {
  const PlacementPlan plan = plan_placements(300, 3, 0.1, 5);
  SyntheticSource source(Image(3, 3, 0.5), plan, NoiseModel{1.0, 6});
  const AutocorrSet one = autocorr_measurement(source, 3, EngineOptions{64, 1});
  const AutocorrSet four = autocorr_measurement(source, 3, EngineOptions{64, 4});
  EXPECT_EQ(one.a1, four.a1);
  EXPECT_EQ(one.a2, four.a2);
  EXPECT_EQ(one.a3, four.a3);
}

TEST(AutocorrMeasurement, PoolsSubMeasurementsByPixelCount) {
  const int L = 3;
  std::mt19937_64 rng(9);
  const Image x = oracle::random_image(L, L, rng);
  const Measurement ya = synthesize(x, plan_placements(60, L, 0.1, 1), NoiseModel{0.2, 1});
  const Measurement yb = synthesize(x, plan_placements(90, L, 0.1, 2), NoiseModel{0.2, 2});
  DenseSource sa(ya), sb(yb);
  const MeasurementSource* both[] = {&sa, &sb};
  const AutocorrSet pooled = autocorr_measurement(std::span<const MeasurementSource* const>(both), L);
  AutocorrSet expected = autocorr_measurement(ya, L);
  expected.scale(3600.0);
  expected.add_scaled(autocorr_measurement(yb, L), 8100.0);
  expected.scale(1.0 / (3600.0 + 8100.0));
  EXPECT_LT(oracle::max_abs_diff(pooled, expected), 1e-15);
  EXPECT_EQ(pooled.norm_area, 11700.0);
}

TEST(AutocorrMeasurement, PureNoiseSecondMoment) {
  const PlacementPlan empty{512, 4, {}};
  SyntheticSource source(Image(4, 4), empty, NoiseModel{2.0, 10});
  const AutocorrSet a = autocorr_measurement(source, 4);
  const double n = 512.0 * 512.0;
  // Var of mean(e^2) is 2 sigma^4 / n; off-zero shifts have variance sigma^4 / n.
  EXPECT_NEAR(a.a2[0], 2.0, 4.0 * std::sqrt(8.0 / n));
  for (std::size_t s = 1; s < a.a2.size(); ++s) EXPECT_NEAR(a.a2[s], 0.0, 4.0 * std::sqrt(4.0 / n));
}

TEST(AutocorrMeasurement, Errors) {
  const Measurement y = synthesize(Image(4, 4), PlacementPlan{64, 4, {}}, NoiseModel{});
  EXPECT_THROW(autocorr_measurement(y, 4, EngineOptions{3, 1}), ConfigError);
  EXPECT_THROW(autocorr_measurement(y, 40), ConfigError);
}

TEST(AutocorrGradient, ZeroWeightsGiveZero) {
  std::mt19937_64 rng(1);
  const Image g = autocorr_gradient(oracle::random_image(4, 4, rng), AutocorrSet::zeros(4));
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(AutocorrGradient, FirstOrderOnly) {
  std::mt19937_64 rng(2);
  AutocorrSet w = AutocorrSet::zeros(5);
  w.a1 = 1.0;
  const Image g = autocorr_gradient(oracle::random_image(5, 5, rng), w);
  for (double v : g.values()) EXPECT_DOUBLE_EQ(v, 1.0 / 25.0);
}

TEST(AutocorrGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int L = 2 + trial % 4;
    const Image x = oracle::random_image(L, L, rng, -1.0, 1.0);
    AutocorrSet w = AutocorrSet::zeros(L);
    std::normal_distribution<double> n01;
    w.a1 = n01(rng);
    for (double& v : w.a2) v = n01(rng);
    for (double& v : w.a3) v = n01(rng);  // not symmetric on purpose
    auto f = [&](const Image& z) {
      const AutocorrSet a = oracle::brute_autocorr(z, L);
      double acc = w.a1 * a.a1;
      for (std::size_t i = 0; i < a.a2.size(); ++i) acc += w.a2[i] * a.a2[i];
      for (std::size_t i = 0; i < a.a3.size(); ++i) acc += w.a3[i] * a.a3[i];
      return acc;
    };
    const Image numeric = oracle::central_difference(f, x, 1e-5);
    EXPECT_LT(oracle::relative_difference(autocorr_gradient(x, w), numeric), 1e-6);
  }
}

TEST(AutocorrFile, RoundTripAndErrors) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mtd_autocorr_file_test";
  fs::create_directories(dir);
  std::mt19937_64 rng(4);
  const AutocorrSet a = autocorr_image(oracle::random_image(5, 5, rng), 3);
  write_autocorr(dir / "a.mtdac", a);
  EXPECT_EQ(fs::file_size(dir / "a.mtdac"), 6u + 4u + 8u * (1 + 9 + 81));
  const AutocorrSet b = read_autocorr(dir / "a.mtdac");
  EXPECT_EQ(b.L, 3);
  EXPECT_EQ(b.a1, a.a1);
  EXPECT_EQ(b.a2, a.a2);
  EXPECT_EQ(b.a3, a.a3);

  fs::resize_file(dir / "a.mtdac", 100);
  EXPECT_THROW(read_autocorr(dir / "a.mtdac"), LengthError);
  {
    std::ofstream out(dir / "bad.mtdac", std::ios::binary);
    out << "MTDAC2" << std::string(20, '\0');
  }
  EXPECT_THROW(read_autocorr(dir / "bad.mtdac"), FormatError);
  EXPECT_THROW(read_autocorr(dir / "missing.mtdac"), IoError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace mtd
