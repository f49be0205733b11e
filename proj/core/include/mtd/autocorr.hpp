#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mtd/forward_model.hpp"
#include "mtd/image.hpp"

namespace mtd {

/// Autocorrelations of orders 1..3 over non-negative shifts {0..L-1}^2.
///
/// A shift (dr, dc) has linear index s = dr * L + dc. a2[s] pairs z[i] with
/// z[i + shift(s)]; a3[s1 * L^2 + s2] is the triple product with shifts s1 and
/// s2. a3 is stored densely with both (s1, s2) and (s2, s1) present.
struct AutocorrSet {
  int L = 0;
  double a1 = 0.0;
  std::vector<double> a2;
  std::vector<double> a3;
  double norm_area = 0.0;  // the n^2 divisor

  static AutocorrSet zeros(int L);

  int shift_count() const noexcept { return L * L; }
  double& third(int s1, int s2) { return a3[static_cast<std::size_t>(s1) * L * L + s2]; }
  double third(int s1, int s2) const { return a3[static_cast<std::size_t>(s1) * L * L + s2]; }

  bool same_shape(const AutocorrSet& other) const noexcept { return L == other.L; }
  bool all_finite() const noexcept;

  /// Elementwise this += scale * other (norm_area untouched).
  AutocorrSet& add_scaled(const AutocorrSet& other, double scale);
  AutocorrSet& scale(double s);
};

struct EngineOptions {
  int tile = 1024;   // tile side in pixels; must be >= L
  int threads = 0;   // 0: thread_count()
};

/// Zero-padded autocorrelations of an image, divided by width * height.
AutocorrSet autocorr_image(const Image& z, int L);

/// Empirical autocorrelations of a measurement, divided by N^2. Streams the
/// frame in tiles with an (L-1)-pixel halo; tile partial sums are reduced in
/// tile order, so the result is bitwise stable for a fixed tile size.
AutocorrSet autocorr_measurement(const MeasurementSource& y, int L, const EngineOptions& opts = {});

/// Several sub-measurements pooled with pixel-count weights (sum of raw sums
/// over sum of N_k^2).
AutocorrSet autocorr_measurement(std::span<const MeasurementSource* const> ys, int L,
                                 const EngineOptions& opts = {});

AutocorrSet autocorr_measurement(const Measurement& y, int L, const EngineOptions& opts = {});

/// Adjoint of the autocorrelation linearization at x:
///   sum_q sum_shifts weights^q[...] * d a_x^q[...] / d x.
Image autocorr_gradient(const Image& x, const AutocorrSet& weights);

/// MTDAC1 file: char[6] "MTDAC1", u32 L, f64 a1, f64 a2[L*L], f64 a3[L^4],
/// all little-endian.
void write_autocorr(const std::filesystem::path& path, const AutocorrSet& set);
AutocorrSet read_autocorr(const std::filesystem::path& path);

}  // namespace mtd
