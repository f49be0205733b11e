#include "mtd/autocorr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "mtd/error.hpp"
#include "mtd/parallel.hpp"

namespace mtd {
namespace {

constexpr char kAutocorrMagic[6] = {'M', 'T', 'D', 'A', 'C', '1'};

// Four independent accumulators keep the reduction order fixed while letting
// the adds overlap.
double dot(const double* a, const double* b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double sum(const double* a, int n) {
  double s0 = 0.0, s1 = 0.0;
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    s0 += a[i];
    s1 += a[i + 1];
  }
  for (; i < n; ++i) s0 += a[i];
  return s0 + s1;
}

// Raw (undivided) moment sums over the interior rows x cols of `buf`, whose
// row stride is cols + L - 1 and which carries an (L-1)-wide halo on the
// bottom and right. Only the upper triangle s2 >= s1 of a3 is filled.
void accumulate_block(const double* buf, int rows, int cols, int L, AutocorrSet& out,
                      std::vector<double>& prod) {
  const int stride = cols + L - 1;
  const int shifts = L * L;
  prod.resize(static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    const double* base = buf + static_cast<std::size_t>(r) * stride;
    out.a1 += sum(base, cols);
    for (int s1 = 0; s1 < shifts; ++s1) {
      const double* first = base + (s1 / L) * stride + (s1 % L);
      for (int c = 0; c < cols; ++c) prod[static_cast<std::size_t>(c)] = base[c] * first[c];
      out.a2[static_cast<std::size_t>(s1)] += sum(prod.data(), cols);
      double* row3 = out.a3.data() + static_cast<std::size_t>(s1) * shifts;
      for (int s2 = s1; s2 < shifts; ++s2) {
        const double* second = base + (s2 / L) * stride + (s2 % L);
        row3[s2] += dot(prod.data(), second, cols);
      }
    }
  }
}

void mirror_upper(AutocorrSet& set) {
  const int shifts = set.shift_count();
  for (int s1 = 0; s1 < shifts; ++s1) {
    for (int s2 = 0; s2 < s1; ++s2) set.third(s1, s2) = set.third(s2, s1);
  }
}

void add_upper(AutocorrSet& total, const AutocorrSet& part) {
  total.a1 += part.a1;
  for (std::size_t i = 0; i < total.a2.size(); ++i) total.a2[i] += part.a2[i];
  const int shifts = total.shift_count();
  for (int s1 = 0; s1 < shifts; ++s1) {
    for (int s2 = s1; s2 < shifts; ++s2) total.third(s1, s2) += part.third(s1, s2);
  }
}

void finalize(AutocorrSet& set, double area) {
  mirror_upper(set);
  set.norm_area = area;
  set.scale(1.0 / area);
}

struct Tile {
  int row0, col0, rows, cols;
};

// Raw sums of one measurement, reduced tile by tile in index order.
AutocorrSet raw_measurement_sums(const MeasurementSource& y, int L, const EngineOptions& opts) {
  const int N = y.size();
  if (opts.tile < L) {
    throw ConfigError("tile size " + std::to_string(opts.tile) + " smaller than shift range L=" +
                      std::to_string(L));
  }
  if (N < 2 * L) throw ConfigError("measurement side " + std::to_string(N) + " must be >= 2L");
  std::vector<Tile> tiles;
  for (int r = 0; r < N; r += opts.tile) {
    for (int c = 0; c < N; c += opts.tile) {
      tiles.push_back({r, c, std::min(opts.tile, N - r), std::min(opts.tile, N - c)});
    }
  }

  const int threads = opts.threads > 0 ? opts.threads : thread_count();
  const std::size_t batch = static_cast<std::size_t>(std::max(1, threads));
  AutocorrSet total = AutocorrSet::zeros(L);
  std::vector<AutocorrSet> partial(std::min(batch, tiles.size()));
  for (std::size_t start = 0; start < tiles.size(); start += batch) {
    const std::size_t count = std::min(batch, tiles.size() - start);
    parallel_for(
        count,
        [&](std::size_t k) {
          const Tile& t = tiles[start + k];
          const int h = t.rows + L - 1;
          const int w = t.cols + L - 1;
          std::vector<double> buf(static_cast<std::size_t>(h) * w);
          y.read_region(t.row0, t.col0, h, w, buf);
          partial[k] = AutocorrSet::zeros(L);
          std::vector<double> prod;
          accumulate_block(buf.data(), t.rows, t.cols, L, partial[k], prod);
        },
        threads);
    for (std::size_t k = 0; k < count; ++k) add_upper(total, partial[k]);
  }
  return total;
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

AutocorrSet AutocorrSet::zeros(int L) {
  if (L < 1) throw ConfigError("shift range L must be >= 1");
  AutocorrSet s;
  s.L = L;
  const std::size_t shifts = static_cast<std::size_t>(L) * L;
  s.a2.assign(shifts, 0.0);
  s.a3.assign(shifts * shifts, 0.0);
  return s;
}

bool AutocorrSet::all_finite() const noexcept {
  if (!std::isfinite(a1)) return false;
  for (double v : a2) {
    if (!std::isfinite(v)) return false;
  }
  for (double v : a3) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

AutocorrSet& AutocorrSet::add_scaled(const AutocorrSet& other, double s) {
  if (!same_shape(other)) throw ShapeError("autocorrelation sets differ in L");
  a1 += s * other.a1;
  for (std::size_t i = 0; i < a2.size(); ++i) a2[i] += s * other.a2[i];
  for (std::size_t i = 0; i < a3.size(); ++i) a3[i] += s * other.a3[i];
  return *this;
}

AutocorrSet& AutocorrSet::scale(double s) {
  a1 *= s;
  for (double& v : a2) v *= s;
  for (double& v : a3) v *= s;
  return *this;
}

AutocorrSet autocorr_image(const Image& z, int L) {
  if (z.empty()) throw ShapeError("autocorrelation of an empty image");
  if (L < 1 || L > std::min(z.width(), z.height())) {
    throw ShapeError("shift range L=" + std::to_string(L) + " exceeds image size");
  }
  const int rows = z.height();
  const int cols = z.width();
  const int stride = cols + L - 1;
  std::vector<double> buf(static_cast<std::size_t>(rows + L - 1) * stride, 0.0);
  for (int r = 0; r < rows; ++r) {
    std::copy_n(&z.values()[static_cast<std::size_t>(r) * cols], cols, &buf[static_cast<std::size_t>(r) * stride]);
  }
  AutocorrSet set = AutocorrSet::zeros(L);
  std::vector<double> prod;
  accumulate_block(buf.data(), rows, cols, L, set, prod);
  finalize(set, static_cast<double>(rows) * cols);
  return set;
}

AutocorrSet autocorr_measurement(std::span<const MeasurementSource* const> ys, int L,
                                 const EngineOptions& opts) {
  if (ys.empty()) throw ConfigError("no measurements given");
  AutocorrSet total = AutocorrSet::zeros(L);
  double area = 0.0;
  for (const MeasurementSource* y : ys) {
    add_upper(total, raw_measurement_sums(*y, L, opts));
    area += static_cast<double>(y->size()) * y->size();
  }
  finalize(total, area);
  return total;
}

AutocorrSet autocorr_measurement(const MeasurementSource& y, int L, const EngineOptions& opts) {
  const MeasurementSource* one[] = {&y};
  return autocorr_measurement(one, L, opts);
}

AutocorrSet autocorr_measurement(const Measurement& y, int L, const EngineOptions& opts) {
  DenseSource source(y);
  return autocorr_measurement(source, L, opts);
}

Image autocorr_gradient(const Image& x, const AutocorrSet& weights) {
  const int L = weights.L;
  if (x.empty() || L < 1 || L > std::min(x.width(), x.height())) {
    throw ShapeError("gradient shift range does not fit the image");
  }
  const int rows = x.height();
  const int cols = x.width();
  const int pad = L - 1;
  const int stride = cols + 2 * pad;
  // x zero-padded by L-1 on every side so x[k +/- shift] needs no bounds checks.
  std::vector<double> X(static_cast<std::size_t>(rows + 2 * pad) * stride, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) X[static_cast<std::size_t>(r + pad) * stride + c + pad] = x.at(r, c);
  }
  auto offset = [&](int s) { return (s / L) * stride + (s % L); };

  std::vector<double> G(static_cast<std::size_t>(rows) * cols, weights.a1);
  const int shifts = L * L;
  std::vector<int> offsets(static_cast<std::size_t>(shifts));
  for (int s = 0; s < shifts; ++s) offsets[static_cast<std::size_t>(s)] = offset(s);
  for (int s = 0; s < shifts; ++s) {
    const double w = weights.a2[static_cast<std::size_t>(s)];
    if (w == 0.0) continue;
    const int o = offsets[static_cast<std::size_t>(s)];
    for (int r = 0; r < rows; ++r) {
      const double* k = X.data() + static_cast<std::size_t>(r + pad) * stride + pad;
      double* g = G.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) g[c] += w * (k[c + o] + k[c - o]);
    }
  }

  // Third order. The weighted sum is f = sum_i x_i v_i^T W v_i with
  // v_i[a] = x[i + a] and W the symmetrized weights, so
  //   d f / d x_k = v_k^T W v_k + 2 sum_{i + a = k} x_i (W v_i)[a].
  std::vector<double> W(static_cast<std::size_t>(shifts) * shifts);
  for (int a = 0; a < shifts; ++a) {
    for (int b = 0; b < shifts; ++b) {
      W[static_cast<std::size_t>(a) * shifts + b] = 0.5 * (weights.third(a, b) + weights.third(b, a));
    }
  }
  // Scatter target with the same padding as X so i + a stays in range.
  std::vector<double> S(X.size(), 0.0);
  std::vector<double> v(static_cast<std::size_t>(shifts));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t centre = static_cast<std::size_t>(r + pad) * stride + c + pad;
      const double xi = X[centre];
      for (int b = 0; b < shifts; ++b) v[static_cast<std::size_t>(b)] = X[centre + offsets[static_cast<std::size_t>(b)]];
      double quad = 0.0;
      for (int a = 0; a < shifts; ++a) {
        const double* row = W.data() + static_cast<std::size_t>(a) * shifts;
        double acc = 0.0;
        for (int b = 0; b < shifts; ++b) acc += row[b] * v[static_cast<std::size_t>(b)];
        quad += v[static_cast<std::size_t>(a)] * acc;
        S[centre + offsets[static_cast<std::size_t>(a)]] += 2.0 * xi * acc;
      }
      S[centre] += quad;
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      G[static_cast<std::size_t>(r) * cols + c] += S[static_cast<std::size_t>(r + pad) * stride + c + pad];
    }
  }
  const double inv_area = 1.0 / (static_cast<double>(rows) * cols);
  for (double& v : G) v *= inv_area;
  return Image(cols, rows, std::move(G));
}

void write_autocorr(const std::filesystem::path& path, const AutocorrSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kAutocorrMagic, sizeof(kAutocorrMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(set.L));
  put<double>(out, set.a1);
  out.write(reinterpret_cast<const char*>(set.a2.data()), static_cast<std::streamsize>(set.a2.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(set.a3.data()), static_cast<std::streamsize>(set.a3.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path.string());
}

AutocorrSet read_autocorr(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  char magic[6];
  in.read(magic, sizeof(magic));
  if (in.gcount() != 6 || std::memcmp(magic, kAutocorrMagic, 6) != 0) {
    throw FormatError("not an MTDAC1 file: " + path.string());
  }
  std::uint32_t L = 0;
  in.read(reinterpret_cast<char*>(&L), sizeof(L));
  if (in.gcount() != sizeof(L)) throw LengthError("MTDAC1 header in " + path.string());
  if (L == 0 || L > 64) throw FormatError("implausible shift range L=" + std::to_string(L) + " in " + path.string());
  AutocorrSet set = AutocorrSet::zeros(static_cast<int>(L));
  auto read_block = [&](void* dst, std::size_t bytes) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (in.gcount() != static_cast<std::streamsize>(bytes)) throw LengthError("MTDAC1 payload in " + path.string());
  };
  read_block(&set.a1, sizeof(double));
  read_block(set.a2.data(), set.a2.size() * sizeof(double));
  read_block(set.a3.data(), set.a3.size() * sizeof(double));
  if (!set.all_finite()) throw FormatError("non-finite moments in " + path.string());
  return set;
}

}  // namespace mtd
