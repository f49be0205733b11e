#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>

#include "mtd/forward_model.hpp"

namespace mtd {

/// MTDMEAS1 container, all little-endian:
///   char[8]  "MTDMEAS1"
///   u64      N
///   f64      sigma2
///   u64      M (number of planted copies, 0 if unknown)
///   f32      N*N pixels, row-major
inline constexpr char kMeasurementMagic[8] = {'M', 'T', 'D', 'M', 'E', 'A', 'S', '1'};
inline constexpr std::size_t kMeasurementHeaderBytes = 8 + 8 + 8 + 8;

struct MeasurementHeader {
  int N = 0;
  double sigma2 = 0.0;
  long copies = 0;
};

/// Streams `source` to disk in row strips; never holds more than
/// `strip_rows` rows.
void write_measurement(const std::filesystem::path& path, const MeasurementSource& source,
                       int strip_rows = 256);

MeasurementHeader read_measurement_header(const std::filesystem::path& path);

/// Loads the whole file. Pixels come back as the stored float32 values.
Measurement read_measurement(const std::filesystem::path& path);

/// Region reads straight from an MTDMEAS1 file.
class FileSource final : public MeasurementSource {
 public:
  explicit FileSource(const std::filesystem::path& path);

  int size() const override { return header_.N; }
  double sigma2() const override { return header_.sigma2; }
  long copies() const override { return header_.copies; }
  void read_region(int row0, int col0, int rows, int cols, std::span<double> out) const override;

 private:
  std::filesystem::path path_;
  MeasurementHeader header_;
  mutable std::ifstream in_;
  mutable std::mutex mu_;
};

/// Plan sidecar CSV with header "m,row,col". The N and side of the plan are
/// not stored; callers supply them on read.
void write_plan_csv(const std::filesystem::path& path, const PlacementPlan& plan);
PlacementPlan read_plan_csv(const std::filesystem::path& path, int N, int side);

}  // namespace mtd
