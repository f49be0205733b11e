#include "mtd/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mtd/error.hpp"

namespace mtd {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int chebyshev(const Position& a, const Position& b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
}

void require_square(const Image& x, const char* what) {
  if (!x.is_square() || x.empty()) throw ShapeError(std::string(what) + " must be a non-empty square image");
}

}  // namespace

double PlacementPlan::density() const noexcept {
  if (N == 0) return 0.0;
  return static_cast<double>(count()) * side * side / (static_cast<double>(N) * N);
}

void PlacementPlan::validate() const {
  const int lo = side;
  const int hi = N - side - 1;
  for (const Position& p : origins) {
    if (p.row < lo || p.row > hi || p.col < lo || p.col > hi) {
      throw ConfigError("placement (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                        ") outside admissible range");
    }
  }
  const int min_dist = min_origin_distance(side);
  for (std::size_t i = 0; i < origins.size(); ++i) {
    for (std::size_t j = i + 1; j < origins.size(); ++j) {
      if (chebyshev(origins[i], origins[j]) < min_dist) {
        throw ConfigError("placements " + std::to_string(i) + " and " + std::to_string(j) +
                          " violate the separation rule");
      }
    }
  }
}

PlacementPlan plan_placements(int N, int side, double gamma, std::uint64_t seed) {
  if (side < 1) throw ConfigError("copy side must be >= 1");
  if (N <= 3 * side) {
    throw ConfigError("measurement side N=" + std::to_string(N) + " must exceed 3 * " + std::to_string(side));
  }
  if (!(gamma >= 0.0)) throw ConfigError("density gamma must be >= 0");
  const long requested =
      std::lround(gamma * static_cast<double>(N) * N / (static_cast<double>(side) * side));
  if (gamma > kMaxDensity) {
    throw PackingError("density " + std::to_string(gamma) + " exceeds the separation packing limit " +
                           std::to_string(kMaxDensity),
                       0, requested);
  }

  PlacementPlan plan{N, side, {}};
  if (requested == 0) return plan;
  plan.origins.reserve(static_cast<std::size_t>(requested));

  const int lo = side;
  const int hi = N - side - 1;
  const int dist = min_origin_distance(side);
  const int cells = (hi - lo) / dist + 1;
  // Each cell of side `dist` can hold at most one origin.
  std::vector<int> grid(static_cast<std::size_t>(cells) * cells, -1);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(lo, hi);
  const long max_attempts = 50 * requested;
  for (long attempt = 0; attempt < max_attempts && plan.count() < requested; ++attempt) {
    const Position p{coord(rng), coord(rng)};
    const int cr = (p.row - lo) / dist;
    const int cc = (p.col - lo) / dist;
    bool ok = true;
    for (int dr = -1; dr <= 1 && ok; ++dr) {
      for (int dc = -1; dc <= 1 && ok; ++dc) {
        const int r = cr + dr;
        const int c = cc + dc;
        if (r < 0 || c < 0 || r >= cells || c >= cells) continue;
        const int idx = grid[static_cast<std::size_t>(r) * cells + c];
        if (idx >= 0 && chebyshev(plan.origins[static_cast<std::size_t>(idx)], p) < dist) ok = false;
      }
    }
    if (!ok) continue;
    grid[static_cast<std::size_t>(cr) * cells + cc] = static_cast<int>(plan.origins.size());
    plan.origins.push_back(p);
  }
  if (plan.count() < requested) {
    throw PackingError("placed " + std::to_string(plan.count()) + " of " + std::to_string(requested) +
                           " copies within " + std::to_string(max_attempts) + " attempts",
                       plan.count(), requested);
  }
  return plan;
}

DownsampleOp::DownsampleOp(int high, int low) : high_(high), low_(low) {
  if (low < 1 || high < 1) throw ShapeError("down-sampling sizes must be positive");
  if (high % low != 0) {
    throw ShapeError("high-resolution side " + std::to_string(high) + " not divisible by low side " +
                     std::to_string(low));
  }
  stride_ = high / low;
}

std::vector<std::size_t> DownsampleOp::sampled_indices() const {
  std::vector<std::size_t> idx;
  idx.reserve(static_cast<std::size_t>(low_) * low_);
  for (int i = 0; i < low_; ++i) {
    for (int j = 0; j < low_; ++j) idx.push_back(static_cast<std::size_t>(i * stride_) * high_ + j * stride_);
  }
  return idx;
}

Image DownsampleOp::apply(const Image& high_res) const {
  if (high_res.width() != high_ || high_res.height() != high_) {
    throw ShapeError("down-sampling expects a " + std::to_string(high_) + "x" + std::to_string(high_) + " image");
  }
  Image out = Image::square(low_);
  for (int i = 0; i < low_; ++i) {
    for (int j = 0; j < low_; ++j) out.at(i, j) = high_res.at(i * stride_, j * stride_);
  }
  return out;
}

Image DownsampleOp::adjoint(const Image& low_res) const {
  if (low_res.width() != low_ || low_res.height() != low_) {
    throw ShapeError("adjoint expects a " + std::to_string(low_) + "x" + std::to_string(low_) + " image");
  }
  Image out = Image::square(high_);
  for (int i = 0; i < low_; ++i) {
    for (int j = 0; j < low_; ++j) out.at(i * stride_, j * stride_) = low_res.at(i, j);
  }
  return out;
}

double standard_normal(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t key = splitmix64(seed);
  const std::uint64_t h1 = splitmix64(key + 2 * index);
  const std::uint64_t h2 = splitmix64(key + 2 * index + 1);
  constexpr double kUnit = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = static_cast<double>((h1 >> 11) + 1) * kUnit;  // (0, 1]
  const double u2 = static_cast<double>(h2 >> 11) * kUnit;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void DenseSource::read_region(int row0, int col0, int rows, int cols, std::span<double> out) const {
  const int N = m_.N;
  for (int r = 0; r < rows; ++r) {
    const int y = row0 + r;
    double* dst = out.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      const int x = col0 + c;
      dst[c] = (y >= 0 && y < N && x >= 0 && x < N) ? m_.data[static_cast<std::size_t>(y) * N + x] : 0.0;
    }
  }
}

SyntheticSource::SyntheticSource(Image copy, PlacementPlan plan, NoiseModel noise)
    : copy_(std::move(copy)), plan_(std::move(plan)), noise_(noise) {
  if (copy_.width() != plan_.side || copy_.height() != plan_.side) {
    throw ShapeError("copy is " + std::to_string(copy_.width()) + "x" + std::to_string(copy_.height()) +
                     " but plan expects side " + std::to_string(plan_.side));
  }
  if (!(noise_.sigma2 >= 0.0)) throw ConfigError("noise variance must be >= 0");
  bucket_ = std::max(4 * plan_.side, 128);
  buckets_per_side_ = (plan_.N + bucket_ - 1) / bucket_;
  buckets_.resize(static_cast<std::size_t>(buckets_per_side_) * buckets_per_side_);
  for (std::size_t i = 0; i < plan_.origins.size(); ++i) {
    const Position& p = plan_.origins[i];
    buckets_[static_cast<std::size_t>(p.row / bucket_) * buckets_per_side_ + p.col / bucket_].push_back(i);
  }
}

void SyntheticSource::read_region(int row0, int col0, int rows, int cols, std::span<double> out) const {
  const int N = plan_.N;
  const double sigma = std::sqrt(noise_.sigma2);
  for (int r = 0; r < rows; ++r) {
    const int y = row0 + r;
    double* dst = out.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      const int x = col0 + c;
      if (y < 0 || y >= N || x < 0 || x >= N) {
        dst[c] = 0.0;
      } else if (sigma > 0.0) {
        dst[c] = sigma * standard_normal(noise_.seed, static_cast<std::uint64_t>(y) * N + x);
      } else {
        dst[c] = 0.0;
      }
    }
  }

  const int side = plan_.side;
  // Copies whose origin lies in [row0 - side + 1, row0 + rows) can touch the region.
  const int br0 = std::max(0, (row0 - side + 1) / bucket_);
  const int br1 = std::min(buckets_per_side_ - 1, std::max(0, row0 + rows - 1) / bucket_);
  const int bc0 = std::max(0, (col0 - side + 1) / bucket_);
  const int bc1 = std::min(buckets_per_side_ - 1, std::max(0, col0 + cols - 1) / bucket_);
  for (int br = br0; br <= br1; ++br) {
    for (int bc = bc0; bc <= bc1; ++bc) {
      for (std::size_t idx : buckets_[static_cast<std::size_t>(br) * buckets_per_side_ + bc]) {
        const Position& p = plan_.origins[idx];
        const int r_lo = std::max(p.row, row0);
        const int r_hi = std::min(p.row + side, row0 + rows);
        const int c_lo = std::max(p.col, col0);
        const int c_hi = std::min(p.col + side, col0 + cols);
        for (int y = r_lo; y < r_hi; ++y) {
          double* dst = out.data() + static_cast<std::size_t>(y - row0) * cols;
          for (int x = c_lo; x < c_hi; ++x) dst[x - col0] += copy_.at(y - p.row, x - p.col);
        }
      }
    }
  }
}

Measurement synthesize(const Image& x, const PlacementPlan& plan, const NoiseModel& noise) {
  x.validate();
  SyntheticSource source(x, plan, noise);
  Measurement m;
  m.N = plan.N;
  m.sigma2 = noise.sigma2;
  m.plan = plan;
  m.data.resize(static_cast<std::size_t>(plan.N) * plan.N);
  source.read_region(0, 0, plan.N, plan.N, m.data);
  return m;
}

Measurement synthesize_superres(const Image& x_high, const DownsampleOp& P, const PlacementPlan& plan,
                                const NoiseModel& noise) {
  if (plan.side != P.low()) {
    throw ShapeError("plan side " + std::to_string(plan.side) + " != low-resolution side " +
                     std::to_string(P.low()));
  }
  return synthesize(P.apply(x_high), plan, noise);
}

double snr(const Image& x, double sigma2) {
  require_square(x, "SNR target");
  if (sigma2 < 0.0) throw ConfigError("noise variance must be >= 0");
  if (sigma2 == 0.0) return std::numeric_limits<double>::infinity();
  const double L = x.side();
  return squared_norm(x) / (0.25 * std::numbers::pi * L * L * sigma2);
}

double sigma_for_snr(const Image& x, double target_snr) {
  require_square(x, "SNR target");
  if (!(target_snr > 0.0)) throw ConfigError("target SNR must be > 0");
  const double energy = squared_norm(x);
  if (energy == 0.0) throw UndefinedError("SNR of an all-zero image");
  const double L = x.side();
  return energy / (0.25 * std::numbers::pi * L * L * target_snr);
}

double pooled_density(std::span<const PlacementPlan> plans) {
  double covered = 0.0;
  double area = 0.0;
  for (const PlacementPlan& p : plans) {
    covered += static_cast<double>(p.count()) * p.side * p.side;
    area += static_cast<double>(p.N) * p.N;
  }
  return area > 0.0 ? covered / area : 0.0;
}

}  // namespace mtd
