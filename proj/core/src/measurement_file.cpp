#include "mtd/measurement_file.hpp"

#include <bit>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "mtd/error.hpp"

namespace mtd {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw LengthError("MTDMEAS1 header in " + path.string());
  }
  return v;
}

MeasurementHeader parse_header(std::istream& in, const std::filesystem::path& path) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != 8 || std::memcmp(magic, kMeasurementMagic, 8) != 0) {
    throw FormatError("not an MTDMEAS1 file: " + path.string());
  }
  MeasurementHeader h;
  const auto N = get<std::uint64_t>(in, path);
  h.sigma2 = get<double>(in, path);
  h.copies = static_cast<long>(get<std::uint64_t>(in, path));
  if (N == 0 || N > (1u << 20)) throw FormatError("implausible measurement side in " + path.string());
  if (!(h.sigma2 >= 0.0)) throw FormatError("negative or NaN noise variance in " + path.string());
  h.N = static_cast<int>(N);
  return h;
}

void check_payload(std::ifstream& in, const MeasurementHeader& h, const std::filesystem::path& path) {
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t expected =
      kMeasurementHeaderBytes + static_cast<std::uint64_t>(h.N) * h.N * sizeof(float);
  if (bytes < expected) {
    throw LengthError("MTDMEAS1 payload in " + path.string() + " has " + std::to_string(bytes) +
                      " bytes, expected " + std::to_string(expected));
  }
  in.seekg(static_cast<std::streamoff>(kMeasurementHeaderBytes));
}

}  // namespace

void write_measurement(const std::filesystem::path& path, const MeasurementSource& source, int strip_rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const int N = source.size();
  out.write(kMeasurementMagic, 8);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(N));
  put<double>(out, source.sigma2());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(source.copies()));

  strip_rows = std::max(1, strip_rows);
  std::vector<double> strip(static_cast<std::size_t>(strip_rows) * N);
  std::vector<float> packed(strip.size());
  for (int row0 = 0; row0 < N; row0 += strip_rows) {
    const int rows = std::min(strip_rows, N - row0);
    const std::size_t n = static_cast<std::size_t>(rows) * N;
    source.read_region(row0, 0, rows, N, std::span<double>(strip.data(), n));
    for (std::size_t i = 0; i < n; ++i) packed[i] = static_cast<float>(strip[i]);
    out.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(n * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

MeasurementHeader read_measurement_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return parse_header(in, path);
}

Measurement read_measurement(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  const MeasurementHeader h = parse_header(in, path);
  check_payload(in, h, path);
  Measurement m;
  m.N = h.N;
  m.sigma2 = h.sigma2;
  const std::size_t n = static_cast<std::size_t>(h.N) * h.N;
  std::vector<float> packed(n);
  in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(float))) throw LengthError(path.string());
  m.data.assign(packed.begin(), packed.end());
  return m;
}

FileSource::FileSource(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open for reading: " + path.string());
  header_ = parse_header(in_, path);
  check_payload(in_, header_, path);
}

void FileSource::read_region(int row0, int col0, int rows, int cols, std::span<double> out) const {
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(rows) * cols, 0.0);
  const int N = header_.N;
  const int c_lo = std::max(col0, 0);
  const int c_hi = std::min(col0 + cols, N);
  if (c_lo >= c_hi) return;
  std::vector<float> buf(static_cast<std::size_t>(c_hi - c_lo));
  std::lock_guard<std::mutex> lock(mu_);
  for (int r = 0; r < rows; ++r) {
    const int y = row0 + r;
    if (y < 0 || y >= N) continue;
    const std::uint64_t offset =
        kMeasurementHeaderBytes + (static_cast<std::uint64_t>(y) * N + c_lo) * sizeof(float);
    in_.seekg(static_cast<std::streamoff>(offset));
    in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in_) throw IoError("read failed: " + path_.string());
    double* dst = out.data() + static_cast<std::size_t>(r) * cols + (c_lo - col0);
    for (std::size_t i = 0; i < buf.size(); ++i) dst[i] = buf[i];
  }
}

void write_plan_csv(const std::filesystem::path& path, const PlacementPlan& plan) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "m,row,col\n";
  for (std::size_t m = 0; m < plan.origins.size(); ++m) {
    out << m << ',' << plan.origins[m].row << ',' << plan.origins[m].col << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PlacementPlan read_plan_csv(const std::filesystem::path& path, int N, int side) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "m,row,col") throw FormatError("plan CSV header mismatch in " + path.string());
  PlacementPlan plan{N, side, {}};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    long m = 0;
    Position p;
    char c1 = 0, c2 = 0;
    if (!(row >> m >> c1 >> p.row >> c2 >> p.col) || c1 != ',' || c2 != ',') {
      throw FormatError("malformed plan row '" + line + "' in " + path.string());
    }
    plan.origins.push_back(p);
  }
  return plan;
}

}  // namespace mtd
