#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mtd/image.hpp"

namespace mtd {

/// Top-left corner of one planted copy (0-based).
struct Position {
  int row = 0;
  int col = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

/// Ground-truth layout of a synthesized measurement.
///
/// Origins lie in [side, N - side - 1] on both axes, and the empty gap between
/// any two copies is at least `side` pixels in Chebyshev distance (origin
/// distance >= 2 * side), so no shift in {0..side-1}^2 pairs pixels from
/// different copies.
struct PlacementPlan {
  int N = 0;
  int side = 0;
  std::vector<Position> origins;

  long count() const noexcept { return static_cast<long>(origins.size()); }
  /// M * side^2 / N^2.
  double density() const noexcept;
  /// Throws ConfigError if any invariant above is violated.
  void validate() const;
};

/// Largest density the separation rule admits (one copy per (2 side)^2 cell).
inline constexpr double kMaxDensity = 0.25;

/// Minimum Chebyshev distance between two copy origins for a copy side.
constexpr int min_origin_distance(int side) { return 2 * side; }

/// Dart throwing with rejection: M = round(gamma N^2 / side^2) copies, at most
/// 50 M attempts. Throws PackingError (with the achieved count) when the
/// target cannot be reached, ConfigError for gamma outside [0, kMaxDensity] or
/// N <= 3 side.
PlacementPlan plan_placements(int N, int side, double gamma, std::uint64_t seed);

/// Equally spaced sub-sampling of a high-resolution image: keeps pixels
/// (s*i, s*j) with stride s = high / low.
class DownsampleOp {
 public:
  DownsampleOp() = default;
  DownsampleOp(int high, int low);

  static DownsampleOp identity(int side) { return DownsampleOp(side, side); }

  int high() const noexcept { return high_; }
  int low() const noexcept { return low_; }
  int stride() const noexcept { return stride_; }
  bool is_identity() const noexcept { return stride_ == 1; }
  /// True when high-resolution pixel (row, col) is in the sampled set.
  bool sampled(int row, int col) const noexcept {
    return row % stride_ == 0 && col % stride_ == 0;
  }
  /// Row-major linear indices of the sampled set; size low()^2.
  std::vector<std::size_t> sampled_indices() const;

  /// x_high -> x_low.
  Image apply(const Image& high_res) const;
  /// Embeds a low-resolution field in the high-resolution grid (zeros off the
  /// sampled set). This is the exact adjoint of apply().
  Image adjoint(const Image& low_res) const;

 private:
  int high_ = 0;
  int low_ = 0;
  int stride_ = 1;
};

/// i.i.d. zero-mean Gaussian noise. Each pixel's draw is a pure function of
/// (seed, linear pixel index), so any tiling or thread count reproduces the
/// same field.
struct NoiseModel {
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
};

/// Standard normal deviate for (seed, index).
double standard_normal(std::uint64_t seed, std::uint64_t index);

/// Dense N x N measurement held in memory.
struct Measurement {
  int N = 0;
  std::vector<double> data;
  double sigma2 = 0.0;
  std::optional<PlacementPlan> plan;  // ground truth; never read by recovery

  double at(int row, int col) const {
    return data[static_cast<std::size_t>(row) * N + col];
  }
};

/// Read access to a measurement, possibly without materializing it.
class MeasurementSource {
 public:
  virtual ~MeasurementSource() = default;
  virtual int size() const = 0;
  virtual double sigma2() const = 0;
  /// Number of planted copies if known (0 otherwise).
  virtual long copies() const = 0;
  /// Fills out (rows x cols, row-major) with pixels starting at (row0, col0).
  /// Pixels outside the N x N frame read as zero.
  virtual void read_region(int row0, int col0, int rows, int cols, std::span<double> out) const = 0;
};

class DenseSource final : public MeasurementSource {
 public:
  explicit DenseSource(const Measurement& m) : m_(m) {}
  int size() const override { return m_.N; }
  double sigma2() const override { return m_.sigma2; }
  long copies() const override { return m_.plan ? m_.plan->count() : 0; }
  void read_region(int row0, int col0, int rows, int cols, std::span<double> out) const override;

 private:
  const Measurement& m_;
};

/// Procedurally generated measurement: planted copies plus counter-based
/// noise. Regions are produced on demand, so arbitrarily large N costs only
/// the plan.
class SyntheticSource final : public MeasurementSource {
 public:
  SyntheticSource(Image copy, PlacementPlan plan, NoiseModel noise);

  int size() const override { return plan_.N; }
  double sigma2() const override { return noise_.sigma2; }
  long copies() const override { return plan_.count(); }
  void read_region(int row0, int col0, int rows, int cols, std::span<double> out) const override;

  const PlacementPlan& plan() const noexcept { return plan_; }
  const Image& copy() const noexcept { return copy_; }

 private:
  Image copy_;
  PlacementPlan plan_;
  NoiseModel noise_;
  int bucket_ = 1;  // bucket side in pixels
  int buckets_per_side_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;  // copy indices by origin bucket
};

/// y = sum of copies of x at plan.origins + noise. Requires x to be
/// plan.side x plan.side.
Measurement synthesize(const Image& x, const PlacementPlan& plan, const NoiseModel& noise);

/// synthesize() applied to P x_high.
Measurement synthesize_superres(const Image& x_high, const DownsampleOp& P, const PlacementPlan& plan,
                                const NoiseModel& noise);

/// ||x||_F^2 / (0.25 pi L^2 sigma2), L = image side. sigma2 == 0 yields +inf.
double snr(const Image& x, double sigma2);

/// Noise variance that gives the requested SNR for x.
double sigma_for_snr(const Image& x, double target_snr);

/// Pixel-weighted density over a set of measurements: sum M_k side^2 / sum N_k^2.
double pooled_density(std::span<const PlacementPlan> plans);

}  // namespace mtd
